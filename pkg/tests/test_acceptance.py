"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one CRITERION line so a -s run reads as a checklist. All
random fixtures are generated from fixed seeds; reruns are bit-identical.
"""

import math
import random
import time

import numpy as np
from scipy.stats import norm

from corpus import DOCUMENTS
from helpers import (
    brute_force_cut_sets,
    brute_force_top_probability,
    random_bayes_net,
    random_event_tree,
    random_fault_tree,
)
from riskforge import ParseError, parse, serialize
from riskforge.bayesnet import joint_enumerate, query
from riskforge.estimate import (
    ExpertEstimate,
    calibration_weights,
    default_band_table,
    band_likelihood,
    likelihood_chain,
    pool_experts,
)
from riskforge.eventtree import enumerate_sequences
from riskforge.evaluate import compare_to_tolerance, dsa_check
from riskforge.faulttree import basic_events, minimal_cut_sets, top_probability_exact, top_probability_rare
from riskforge.model import UncertainQuantity
from riskforge.quant import CorrelationSpec, RandomStream, aggregate_loss, copula_sample, propagate, sample, var_cvar


def report(name: str, ok: bool) -> None:
    print(f"CRITERION {name}: {'PASS' if ok else 'FAIL'}")
    assert ok


def test_criterion_1_mcs_oracle_suite():
    """200 random coherent trees, <= 12 events: exact oracle agreement."""
    started = time.monotonic()
    ok = True
    for seed in range(200):
        tree = random_fault_tree(random.Random(seed), max_events=12)
        ok = ok and set(minimal_cut_sets(tree)) == brute_force_cut_sets(tree)
    elapsed = time.monotonic() - started
    report("1 MCS oracle suite", ok and elapsed < 60.0)


def test_criterion_2_top_probability_suite():
    """Exact matches enumeration to 1e-12; rare bound dominates; small-p gap < 1%."""
    ok = True
    for seed in range(200):
        rng = random.Random(seed)
        tree = random_fault_tree(rng, max_events=12)
        assignment = {eid: rng.uniform(0.0, 1.0) for eid in basic_events(tree)}
        exact = float(top_probability_exact(tree, assignment))
        rare = float(top_probability_rare(tree, assignment))
        ok = ok and abs(exact - brute_force_top_probability(tree, assignment)) <= 1e-12
        ok = ok and rare >= exact - 1e-15
        small = {eid: rng.uniform(1e-4, 1e-3) for eid in assignment}
        exact_small = float(top_probability_exact(tree, small))
        rare_small = float(top_probability_rare(tree, small))
        ok = ok and rare_small >= exact_small - 1e-15
        if exact_small > 0:
            ok = ok and (rare_small - exact_small) / exact_small < 0.01
    report("2 top-probability suite", ok)


def test_criterion_3_eta_conservation():
    """100 random event trees conserve the initiating value to 1e-12."""
    ok = True
    for seed in range(100):
        tree = random_event_tree(random.Random(seed))
        total = sum(s.value for s in enumerate_sequences(tree))
        ok = ok and abs(total - tree.initiating.point_value()) <= 1e-12
    report("3 ETA conservation", ok)


def _posterior_from_joint(net, joint, target, evidence):
    """Marginalize the enumerated joint factor down to P(target | evidence)."""
    values = joint.values
    scope = list(joint.scope)
    for var, state in sorted(evidence.items(), reverse=True):
        axis = scope.index(var)
        values = np.take(values, net.node_map[var].states.index(state), axis=axis)
        scope.pop(axis)
    axis = scope.index(target)
    keep = tuple(i for i in range(len(scope)) if i != axis)
    marginal = values.sum(axis=keep) if keep else values
    total = marginal.sum()
    if total <= 0:
        raise ZeroDivisionError("evidence has zero probability")
    return dict(zip(net.node_map[target].states, marginal / total))


def test_criterion_4_bn_oracle_suite():
    """100 random DAGs x 5 evidence patterns: query vs joint_enumerate <= 1e-9;
    elimination-order independence <= 1e-12."""
    ok = True
    for seed in range(100):
        rng = random.Random(seed)
        net = random_bayes_net(rng, max_nodes=10, max_states=3)
        names = [n.id for n in net.nodes]
        joint = joint_enumerate(net, entry_cap=3**10)
        for _ in range(5):
            target = rng.choice(names)
            evidence = {
                other: rng.choice(net.node_map[other].states)
                for other in names
                if other != target and rng.random() < 0.25
            }
            try:
                expected = _posterior_from_joint(net, joint, target, evidence)
            except ZeroDivisionError:
                continue
            post = query(net, target, evidence)
            ok = ok and all(abs(post[s] - p) <= 1e-9 for s, p in expected.items())
        target = names[0]
        hidden = names[1:]
        base = np.array(query(net, target).probabilities)
        for _ in range(3):
            rng.shuffle(hidden)
            alt = np.array(query(net, target, elimination_order=list(hidden)).probabilities)
            ok = ok and float(np.max(np.abs(alt - base))) <= 1e-12
    report("4 BN oracle suite", ok)


def test_criterion_5_mc_statistical_suite():
    """Fixed seed 42: CLT bounds for beta and compound-Poisson means; copula
    score correlations; byte-identical reruns."""
    ok = True
    n = 100_000
    stream = RandomStream(42)

    beta_draws = sample(UncertainQuantity.beta(2, 8), stream, n)
    sigma = math.sqrt(2 * 8 / (10.0**2 * 11.0))
    ok = ok and abs(beta_draws.values.mean() - 0.2) < 3 * sigma / math.sqrt(n)

    compound = aggregate_loss(UncertainQuantity.poisson(3.0), UncertainQuantity.point(1.0), stream, n)
    ok = ok and abs(compound.summary.mean - 3.0) < 3 * math.sqrt(3.0) / math.sqrt(n)

    marginals = {"x": UncertainQuantity.beta(2, 8), "y": UncertainQuantity.interval(0, 1)}
    for rho in (0.0, 0.5, 1.0):
        spec = CorrelationSpec(("x", "y"), ((1.0, rho), (rho, 1.0)))
        joint = copula_sample(spec, marginals, stream, n)
        if rho == 1.0:
            ok = ok and np.array_equal(joint.uniforms[:, 0], joint.uniforms[:, 1])
        else:
            z = norm.ppf(joint.uniforms)
            r = float(np.corrcoef(z[:, 0], z[:, 1])[0, 1])
            ok = ok and abs(r - rho) < 3 / math.sqrt(n)

    rerun = sample(UncertainQuantity.beta(2, 8), RandomStream(42), n)
    ok = ok and beta_draws.values.tobytes() == rerun.values.tobytes()
    report("5 MC statistical suite", ok)


def test_criterion_6_var_cvar_fixtures():
    """Both derived fixtures exact; CVaR >= VaR over 1000 random panels."""
    ok = True
    m1 = var_cvar([0.0] * 95 + [100.0] * 5, 0.95)
    ok = ok and m1.var.magnitude == 0.0 and m1.cvar.magnitude == 100.0
    m2 = var_cvar(list(range(1, 101)), 0.95)
    ok = ok and m2.var.magnitude == 95.0 and m2.cvar.magnitude == 98.0
    rng = random.Random(606)
    for _ in range(1000):
        samples = [rng.uniform(0, 1e6) for _ in range(rng.randint(1, 80))]
        metrics = var_cvar(samples, rng.uniform(0.01, 0.99))
        ok = ok and metrics.cvar.magnitude >= metrics.var.magnitude
    report("6 VaR/CVaR fixtures", ok)


def test_criterion_7_banding_matrix_suite():
    """Band totality on a 1e-4 grid; 54-cell monotonicity; chain bound."""
    ok = True
    levels = {f"LL-{i}" for i in range(9)}
    for i in range(10_001):
        p = i / 10_000
        ok = ok and band_likelihood(p) in levels

    matrix = default_band_table().risk_matrix
    for ll in range(9):
        for hsl in range(6):
            if ll + 1 < 9:
                ok = ok and matrix[ll + 1][hsl] >= matrix[ll][hsl]
            if hsl + 1 < 6:
                ok = ok and matrix[ll][hsl + 1] >= matrix[ll][hsl]

    rng = random.Random(7)
    for _ in range(1000):
        factors = [rng.random() for _ in range(3)]
        ok = ok and float(likelihood_chain(*factors)) <= min(factors) + 1e-15
    report("7 banding/matrix suite", ok)


def test_criterion_8_parser_round_trip():
    """>= 20 documents: parse . serialize . parse fixed point; injected
    syntax errors report exact line numbers."""
    ok = len(DOCUMENTS) >= 20
    for doc in DOCUMENTS:
        model = parse(doc)
        text = serialize(model)
        again = parse(text)
        ok = ok and again == model and serialize(again) == text
    for doc in DOCUMENTS[:10]:
        lines = doc.splitlines()
        line = max(1, len(lines) // 2)
        broken = lines[:]
        broken[line - 1] = broken[line - 1] + " ?!?"
        try:
            parse("\n".join(broken))
            ok = False
        except ParseError as err:
            ok = ok and err.span.line == line
    report("8 parser round-trip", ok)


WALKTHROUGH = """\
hazard H1 "weight exfiltration by a capable model"

ftree CAUSES or {
  event Guardrail_bypass p=0.05
  and {
    event Insider_access p=0.02
    event Audit_blindspot p=0.5
  }
}

etree CONSEQ init p=1.0 branch Egress_monitoring p=0.9 {
  outcome Contained severity=100000.0 monetary-loss
  branch Incident_response p=0.6 {
    outcome Disrupted severity=10000000.0 monetary-loss
    outcome Proliferated severity=1000000000.0 monetary-loss
  }
}

bowtie EXFIL critical Weights_leave_the_lab left CAUSES right CONSEQ

dsa D1 scenario CAUSES {
  set Guardrail_bypass p=1.0
  require top <= 0.5
}

dsa D2 scenario CAUSES {
  fail Insider_access
  require top <= 0.06
}
"""

TOLERANT = "tolerance T unit monetary-loss {\n  point 100000.0 0.1\n  point 10000000.0 0.01\n  point 1000000000.0 0.005\n}\n"
STRICT = "tolerance T unit monetary-loss {\n  point 100000.0 0.1\n  point 10000000.0 0.01\n  point 1000000000.0 0.002\n}\n"


def test_criterion_9_end_to_end_walkthrough():
    """Bow-tie quantified at n=1e4, tolerance verdict flips on one point,
    DSA verdicts match hand-derived values. Runtime < 10 s."""
    started = time.monotonic()
    model = parse(WALKTHROUGH)
    profile = propagate(model.bow_tie("EXFIL"), RandomStream(42), 10_000, model=model)

    # hand-derived: top = 1 - (1-0.05)(1-0.01) = 0.0595; sequence values
    # 0.9, 0.06, 0.04 of the top
    top = 1 - (1 - 0.05) * (1 - 0.02 * 0.5)
    ok = abs(profile.curve.exceedance_at(1e5) - top) <= 1e-12
    ok = ok and abs(profile.curve.exceedance_at(1e9) - top * 0.1 * 0.4) <= 1e-12

    tolerant = parse(TOLERANT).tolerance_curves[0]
    strict = parse(STRICT).tolerance_curves[0]
    ok = ok and compare_to_tolerance(profile.curve, tolerant).acceptable
    flipped = compare_to_tolerance(profile.curve, strict)
    ok = ok and not flipped.acceptable  # flipping one tolerance point flips the verdict

    d1, d2 = (dsa_check(check, model) for check in model.dsa_checks)
    # D1: Guardrail_bypass pinned to 1 makes the OR certain: 1.0 > 0.5 fails
    ok = ok and d1.measured == 1.0 and not d1.passed
    # D2: Insider_access forced to 1: AND becomes 0.5, so the top is
    # 1 - (1-0.05)(1-0.5) = 0.525 > 0.06, which fails
    ok = ok and abs(d2.measured - 0.525) <= 1e-12 and not d2.passed

    elapsed = time.monotonic() - started
    report("9 end-to-end walkthrough", ok and elapsed < 10.0)


def test_criterion_10_pooling_calibration():
    """Brier example reproduces (0.8, 0.2) exactly; pooled means convex
    over 500 random panels."""
    weights = calibration_weights({"A": [1.0, 1.0, 1.0], "B": [0.5, 0.5, 0.5]}, [True, True, True])
    ok = weights["A"] == 0.8 and weights["B"] == 0.2

    rng = random.Random(10)
    for _ in range(500):
        k = rng.randint(1, 8)
        estimates = [ExpertEstimate(f"e{i}", UncertainQuantity.point(rng.random())) for i in range(k)]
        raw = [rng.random() + 1e-9 for _ in range(k)]
        pool_weights = [w / sum(raw) for w in raw]
        pooled = pool_experts(estimates, pool_weights)
        means = [e.quantity.mean() for e in estimates]
        ok = ok and min(means) - 1e-12 <= pooled.mean() <= max(means) + 1e-12
    report("10 pooling/calibration", ok)
