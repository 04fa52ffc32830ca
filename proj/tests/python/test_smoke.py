"""Smoke tests for the python module, including an independent cross-check
of the built-in solver against scipy's HiGHS backend through the exported
LP text."""

import math
import re

import pytest

import gridess as g

TWO_BUS_CASE = """function mpc = case2
mpc.version = '2';
mpc.baseMVA = 1;
mpc.bus = [
\t1\t3\t10\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;
\t2\t1\t4\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;
];
mpc.gen = [
\t1\t0\t0\t0\t0\t1\t1\t1\t4\t2;
\t2\t0\t0\t0\t0\t1\t1\t1\t4\t2;
];
mpc.branch = [
\t1\t2\t0\t1\t0\t4;
];
"""


def recovery_network():
    net = g.parse_matpower(TWO_BUS_CASE)
    bat = g.BatteryConfig()
    bat.e_min, bat.e_max, bat.e0 = 0.0, 4.0, 2.0
    bat.eta_c = bat.eta_d = 0.9
    bat.ec_min = bat.ed_min = 0.0
    bat.ec_max = bat.ed_max = 2.0
    net.battery = bat
    net.set_battery_buses([1])
    return net


def recovery_demand():
    dem = g.DemandScenario()
    dem.horizon = 2
    dem.values = [[10.0, 4.0], [4.0, 4.0]]
    return dem


def test_parse_and_model_shapes():
    net = recovery_network()
    assert net.num_buses() == 2
    assert net.battery_buses() == [1]
    model = g.build_opf(net, recovery_demand(), g.Lambda(0.0, 0.0),
                        g.ModelVariant(g.OpfVariant.BatteryMIP, False))
    assert model.model.num_vars() > 0
    sol = g.solve_mip(model.model)
    assert sol.status == g.SolveStatus.Optimal
    assert sol.objective == pytest.approx(4.2, abs=1e-7)
    d = g.extract_dispatch(model, sol)
    assert d.objective_c == pytest.approx(4.2, abs=1e-7)


def test_penalty_helpers():
    lam = g.best_worst_case_lambda(2.0, 2.0, 0.9, 0.9)
    assert lam.charge == pytest.approx(19.0 / 181.0)
    assert g.zero_gap_lambda_ok(lam, 0.9, 0.9)
    assert g.worst_case_gap_bound(2, 1, 1.0, 1.0, g.Lambda(0.3, 0.3)) == \
        pytest.approx(0.6)


def test_exactness_certificate():
    rep = g.check_exactness_bruteforce(recovery_network(), recovery_demand(),
                                       g.Lambda(19.0 / 181.0, 19.0 / 181.0))
    assert rep.z_ori == pytest.approx(4.2, abs=1e-7)
    assert rep.delta == pytest.approx(1.8, abs=1e-7)
    assert rep.exact and rep.reg_u_recovered


def test_trilevel_small():
    net = recovery_network()
    lam = g.best_worst_case_lambda(2.0, 2.0, 0.9, 0.9)
    res = g.solve_trilevel(net, recovery_demand(), 1, 1, lam)
    exact = g.brute_force_trilevel(net, recovery_demand(), 1, 1)
    assert res.lp.lower <= exact + 1e-6 <= res.reg.upper + 2e-6
    assert res.trilevel_gap_reg <= 0.005 + 1e-9


# ---------------------------------------------------------------------------
# Independent solver cross-check: parse the exported LP text with a tiny
# reader and hand the matrices to scipy (HiGHS). The built-in objective and
# the external one must agree within 1e-6.

def parse_lp_text(text):
    scipy = pytest.importorskip("scipy")
    import numpy as np

    lines = [ln.strip() for ln in text.splitlines()]
    section = None
    obj_terms, constraints, bounds, binaries = {}, [], {}, []
    sense = "min"
    obj_const = 0.0

    def parse_terms(expr):
        terms = {}
        const = 0.0
        tokens = re.findall(r"[+-]|[^\s+-]+", expr)
        sign = 1.0
        pending = None
        for tok in tokens:
            if tok == "+":
                continue
            if tok == "-":
                sign = -sign
                continue
            try:
                val = float(tok)
                if pending is not None:
                    # two numbers in a row: the first was a constant
                    const += pending
                pending = sign * val
                sign = 1.0
                continue
            except ValueError:
                pass
            coeff = pending if pending is not None else sign
            terms[tok] = terms.get(tok, 0.0) + coeff
            pending = None
            sign = 1.0
        if pending is not None:
            const += pending
        return terms, const

    for ln in lines:
        if not ln:
            continue
        low = ln.lower()
        if low in ("minimize", "maximize"):
            sense = low[:3]
            section = "obj"
            continue
        if low == "subject to":
            section = "con"
            continue
        if low == "bounds":
            section = "bnd"
            continue
        if low in ("binary", "binaries", "bin"):
            section = "bin"
            continue
        if low == "end":
            break
        if section == "obj":
            expr = ln.split(":", 1)[-1]
            terms, const = parse_terms(expr)
            for k, v in terms.items():
                obj_terms[k] = obj_terms.get(k, 0.0) + v
            obj_const += const
        elif section == "con":
            body = ln.split(":", 1)[-1]
            m = re.match(r"(.*?)(<=|>=|=)(.*)", body)
            lhs, op, rhs = m.group(1), m.group(2), float(m.group(3))
            terms, const = parse_terms(lhs)
            constraints.append((terms, op, rhs - const))
        elif section == "bnd":
            if ln.endswith(" free"):
                bounds[ln[:-5].strip()] = (-math.inf, math.inf)
            else:
                m = re.match(r"(.+?)\s*(<=|>=|=)\s*(.+?)(?:\s*<=\s*(.+))?$", ln)
                a, op, b, c = m.group(1), m.group(2), m.group(3), m.group(4)
                if c is not None:  # lo <= x <= up
                    lo = -math.inf if a.strip() == "-inf" else float(a)
                    bounds[b.strip()] = (lo, float(c))
                elif op == "=":
                    bounds[a.strip()] = (float(b), float(b))
                elif op == "<=":
                    bounds[a.strip()] = (0.0, float(b))
                else:
                    bounds[a.strip()] = (float(b), math.inf)
        elif section == "bin":
            binaries.append(ln.strip())

    names = []
    seen = set()
    for source in ([obj_terms] + [c[0] for c in constraints] +
                   [bounds, {b: 0 for b in binaries}]):
        for k in source:
            if k not in seen:
                seen.add(k)
                names.append(k)
    index = {n: i for i, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for k, v in obj_terms.items():
        c[index[k]] = v
    if sense == "max":
        c = -c
    lb = np.zeros(n)
    ub = np.full(n, math.inf)
    for k, (lo, up) in bounds.items():
        lb[index[k]], ub[index[k]] = lo, up
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for terms, op, rhs in constraints:
        row = np.zeros(n)
        for k, v in terms.items():
            row[index[k]] = v
        if op == "<=":
            a_ub.append(row)
            b_ub.append(rhs)
        elif op == ">=":
            a_ub.append(-row)
            b_ub.append(-rhs)
        else:
            a_eq.append(row)
            b_eq.append(rhs)
    integrality = np.zeros(n)
    for b in binaries:
        integrality[index[b]] = 1
    return {
        "c": c, "obj_const": obj_const, "sense": sense,
        "A_ub": np.array(a_ub) if a_ub else None,
        "b_ub": np.array(b_ub) if b_ub else None,
        "A_eq": np.array(a_eq) if a_eq else None,
        "b_eq": np.array(b_eq) if b_eq else None,
        "lb": lb, "ub": ub, "integrality": integrality,
    }


def solve_with_scipy(parsed):
    import numpy as np
    from scipy.optimize import linprog, milp, LinearConstraint, Bounds

    if parsed["integrality"].any():
        constraints = []
        if parsed["A_ub"] is not None:
            constraints.append(
                LinearConstraint(parsed["A_ub"], -np.inf, parsed["b_ub"]))
        if parsed["A_eq"] is not None:
            constraints.append(
                LinearConstraint(parsed["A_eq"], parsed["b_eq"], parsed["b_eq"]))
        res = milp(c=parsed["c"], constraints=constraints,
                   bounds=Bounds(parsed["lb"], parsed["ub"]),
                   integrality=parsed["integrality"])
        assert res.success, res.message
        value = res.fun
    else:
        res = linprog(c=parsed["c"], A_ub=parsed["A_ub"], b_ub=parsed["b_ub"],
                      A_eq=parsed["A_eq"], b_eq=parsed["b_eq"],
                      bounds=list(zip(parsed["lb"], parsed["ub"])),
                      method="highs")
        assert res.success, res.message
        value = res.fun
    if parsed["sense"] == "max":
        value = -value
    return value + parsed["obj_const"]


@pytest.mark.parametrize("variant,mip", [
    (g.OpfVariant.BatteryMIP, True),
    (g.OpfVariant.RegBatteryMIP, True),
    (g.OpfVariant.RegBatteryLP, False),
    (g.OpfVariant.NoBattery, False),
])
def test_lp_export_cross_check(variant, mip):
    net = recovery_network()
    lam = g.best_worst_case_lambda(2.0, 2.0, 0.9, 0.9)
    model = g.build_opf(net, recovery_demand(), lam,
                        g.ModelVariant(variant, False))
    ours = g.solve_mip(model.model) if mip else g.solve_lp(model.model)
    assert ours.status == g.SolveStatus.Optimal
    text = g.write_lp_format(model.model)
    external = solve_with_scipy(parse_lp_text(text))
    assert external == pytest.approx(ours.objective, abs=1e-6)


def random_model(rng, with_binaries):
    """Random bounded model with mixed row senses and an occasional free
    variable; x = 0 is kept feasible so the instance cannot be infeasible."""
    model = g.LinearModel()
    n = int(rng.integers(4, 10))
    free_var = -1
    for v in range(n):
        if not with_binaries and v == 0 and rng.uniform() < 0.5:
            model.add_var(-math.inf, math.inf, float(rng.uniform(0.1, 1.0)))
            free_var = v
        else:
            model.add_var(0.0, float(rng.uniform(0.5, 3.0)),
                          float(rng.uniform(-2, 2)))
    for r in range(int(rng.integers(2, 7))):
        entries = [(v, float(rng.uniform(-1, 2))) for v in range(n)
                   if rng.uniform() < 0.7]
        if not entries:
            entries = [(0, 1.0)]
        kind = int(rng.integers(0, 3))
        if kind == 0:
            model.add_row(g.RowSense.LE, float(rng.uniform(0.5, 4.0)), entries)
        elif kind == 1:
            model.add_row(g.RowSense.GE, float(rng.uniform(-4.0, -0.5)), entries)
        elif free_var >= 0:
            # Equality pinning the free variable keeps the LP bounded.
            model.add_row(g.RowSense.EQ, float(rng.uniform(-1, 1)),
                          [(free_var, 1.0), (int(rng.integers(1, n)), 1.0)])
        else:
            model.add_row(g.RowSense.LE, float(rng.uniform(0.5, 4.0)), entries)
    if with_binaries:
        for v in range(min(3, n)):
            model.set_bounds(v, 0.0, 1.0)
            model.set_binary(v)
    if rng.uniform() < 0.3:
        model.sense = g.ObjSense.Maximize
        if free_var >= 0:
            model.sense = g.ObjSense.Minimize
    return model


def test_lp_export_cross_check_random_models():
    import numpy as np

    rng = np.random.default_rng(20240817)
    for _ in range(25):
        model = random_model(rng, with_binaries=False)
        ours = g.solve_lp(model)
        if ours.status != g.SolveStatus.Optimal:
            continue  # unbounded draws are not interesting here
        external = solve_with_scipy(parse_lp_text(g.write_lp_format(model)))
        assert external == pytest.approx(ours.objective, abs=1e-6)


def test_mip_cross_check_random_models():
    import numpy as np

    rng = np.random.default_rng(7181920)
    solved = 0
    for _ in range(20):
        model = random_model(rng, with_binaries=True)
        ours = g.solve_mip(model)
        assert ours.status == g.SolveStatus.Optimal
        external = solve_with_scipy(parse_lp_text(g.write_lp_format(model)))
        assert external == pytest.approx(ours.objective, abs=1e-6)
        solved += 1
    assert solved == 20


def test_solver_determinism():
    net = recovery_network()
    model = g.build_opf(net, recovery_demand(), g.Lambda(0.1, 0.1),
                        g.ModelVariant(g.OpfVariant.RegBatteryMIP, False))
    a = g.solve_mip(model.model)
    b = g.solve_mip(model.model)
    assert a.primal == b.primal
    assert a.objective == b.objective
