"""Acceptance criteria 1-8, each as one test that logs a PASS/FAIL line.

Every check is exact; counts of instances are reported in the summary line
so the thresholds can be read off the test output.
"""

import contextlib
import io
import itertools
import random
import time
from fractions import Fraction as F

from generators import (
    combine,
    line_fan,
    random_cycle,
    random_fan,
    random_form,
    random_pl_function,
    random_polynomial,
    refine_all,
)
from oracles import oracle_affine_weight, oracle_psh, randomized_normal, sympy_rank
from tropkit.cli import main
from tropkit.cycles import check_balancing, cycles_equal, make_cycle
from tropkit.documents import cycle_to_dict, dumps, load_cycle, trace_to_dict, write_cycle
from tropkit.errors import Exhausted
from tropkit.geometry import linalg as la
from tropkit.geometry.polyhedron import AffineForm, cone, from_vrep
from tropkit.maxprinciple import is_local_max, recheck_trace, slicing_trace, verify_max_principle
from tropkit.plfunc import (
    PiecewiseFunction,
    QuadraticForm,
    TropicalPolynomial,
    affine_function,
    check_psh,
    corner_locus,
    empty_cycle,
    refine,
    restrict,
)
from tropkit.slicing import RationalHyperplane, is_generic, stable_intersect

MAX_CELLS = 40


@contextlib.contextmanager
def criterion(log, number, title):
    stats = {}
    start = time.perf_counter()
    try:
        yield stats
    except BaseException:
        line = f"criterion {number}: FAIL  {title}"
        log.append(line)
        print(line)
        raise
    stats["seconds"] = round(time.perf_counter() - start, 1)
    detail = ", ".join(f"{k}={v}" for k, v in stats.items())
    line = f"criterion {number}: PASS  {title} ({detail})"
    log.append(line)
    print(line)


def ray(*v):
    return cone([v])


def ray_sum(rays_weights):
    n = len(rays_weights[0][0])
    total = la.zero(n)
    for r, w in rays_weights:
        total = la.add(total, la.scale(w, la.primitive_vector(r)))
    return total


def in_span(v, basis):
    return sympy_rank(list(basis) + [v]) == sympy_rank(list(basis))


def perturbed(rng, c):
    cells = c.weighted_cells()
    k = rng.randrange(len(cells))
    return make_cycle([(cell, w + (1 if i == k else 0)) for i, (cell, w) in enumerate(cells)])


# -- 1 ------------------------------------------------------------------------


HANDCRAFTED_FANS = [
    [((-1, 0), 1), ((0, -1), 1), ((1, 1), 1)],
    [((1, 0), 1), ((0, 1), 1)],
    [((1, 0), 2), ((-1, 0), 2)],
    [((1, 0), 1), ((0, 1), 1), ((-1, -1), 2)],
    [((2, 1), 1), ((-2, -1), 1)],
    [((1, 2), 1), ((-1, 0), 1), ((0, -1), 2)],
    [((1, 2), 1), ((-1, 0), 1), ((0, -1), 1)],
    [((2, 0), 1), ((-1, 0), 1)],
    [((1, 0), 3), ((0, 1), 3), ((-1, -1), 3)],
    [((1, 0, 0), 1), ((0, 1, 0), 1), ((0, 0, 1), 1), ((-1, -1, -1), 1)],
    [((1, 0, 0), 1), ((0, 1, 0), 1), ((0, 0, 1), 1)],
    [((1, 1, 0), 1), ((-1, 0, 0), 1), ((0, -1, 0), 1)],
    [((1, 1, 0), 1), ((-1, 0, 0), 1), ((0, -1, 1), 1)],
]


def test_criterion_1_balancing(criterion_log):
    rng = random.Random(101)
    with criterion(criterion_log, 1, "balancing suite with exact excess vectors") as stats:
        checked = balanced = 0
        # one-dimensional fans: the excess at the vertex is the plain weighted sum of rays
        fans = [fan for fan in HANDCRAFTED_FANS]
        for _ in range(25):
            c = line_fan(rng, rng.randint(2, 3))
            rw = [(c.cells[s].rays[0], c.weights[s]) for s in c.maximal]
            if rng.random() < 0.6:
                k = rng.randrange(len(rw))
                rw[k] = (rw[k][0], rw[k][1] + rng.choice([-1, 1, 2]))
            fans.append([(r, w) for r, w in rw if w != 0])
        for fan in fans:
            c = make_cycle([(ray(*r), w) for r, w in fan])
            expected = ray_sum(fan)
            rep = check_balancing(c)
            assert rep.checked == 1
            if la.is_zero(expected):
                assert rep.verdict and not rep.violations
                balanced += 1
            else:
                (v,) = rep.violations
                assert c.cells[v.face].dim == 0
                assert tuple(v.excess) == tuple(expected)
            checked += 1
        # a bounded segment is unbalanced at both ends with opposite excess
        seg = make_cycle([(from_vrep(2, [(0, 0), (1, 2)]), 3)])
        rep = check_balancing(seg)
        assert {(seg.cells[v.face].vertices[0], tuple(v.excess)) for v in rep.violations} == {
            ((0, 0), (3, 6)),
            ((1, 2), (-3, -6)),
        }
        checked += 1
        # higher dimensional cycles: compare against sums of randomized normals modulo lin(tau)
        for _ in range(25):
            c = random_cycle(rng)
            if rng.random() < 0.5:
                c = perturbed(rng, c)
            rep = check_balancing(c)
            bad = {v.face: v.excess for v in rep.violations}
            for tau in c.codim_one_faces():
                total = la.zero(c.ambient_dim)
                for s in c.adjacent(tau):
                    total = la.add(total, la.scale(c.weights[s], randomized_normal(rng, c.cells[s], c.cells[tau])))
                basis = c.cells[tau].direction_basis()
                if in_span(total, basis):
                    assert tau not in bad
                else:
                    assert tau in bad
                    assert in_span(la.sub(bad[tau], total), basis)
            balanced += bool(rep)
            checked += 1
        stats.update(cycles=checked, balanced=balanced, unbalanced=checked - balanced)
        assert checked >= 21


# -- 2 ------------------------------------------------------------------------


def _random_instance(rng):
    while True:
        c = random_cycle(rng, rng.choice([2, 3, 3, 4]))
        f = random_pl_function(rng, c)
        if len(f.cycle.maximal) <= MAX_CELLS:
            return c, f


def test_criterion_2_corner_locus_oracle(criterion_log):
    rng = random.Random(202)
    with criterion(criterion_log, 2, "corner-locus weights equal brute-force weights") as stats:
        faces = 0
        for _ in range(100):
            _, f = _random_instance(rng)
            cl = corner_locus(f)
            n = f.cycle.ambient_dim
            for tau in f.cycle.codim_one_faces():
                normals = {s: randomized_normal(rng, f.cycle.cells[s], f.cycle.cells[tau]) for s in f.cycle.adjacent(tau)}
                w = cl.weight_functions.get(tau, AffineForm.const(n, 0))
                assert la.is_zero(w.linear)
                assert oracle_affine_weight(f, tau, normals) == w.constant
                faces += 1
        stats.update(instances=100, faces=faces)


# -- 3 ------------------------------------------------------------------------


def test_criterion_3_affine_kernel(criterion_log):
    rng = random.Random(303)
    with criterion(criterion_log, 3, "corner locus ignores global affine functions") as stats:
        for _ in range(100):
            c, f = _random_instance(rng)
            g = random_form(rng, c.ambient_dim)
            a, b = corner_locus(f), corner_locus(f + QuadraticForm.affine(g))
            assert a.faces == b.faces
            assert all(a.weight_functions[t] == b.weight_functions[t] for t in a.faces)
            assert corner_locus(affine_function(c, g)).faces == ()
        controls = nonempty = 0
        while controls < 10:
            c = perturbed(rng, random_cycle(rng))
            if check_balancing(c):
                continue
            controls += 1
            g = random_form(rng, c.ambient_dim)
            if la.is_zero(g.linear):
                continue
            nonempty += bool(corner_locus(affine_function(c, g), require_balanced=False).faces)
        stats.update(instances=100, unbalanced_controls=controls, nonempty_controls=nonempty)
        assert nonempty >= 1


# -- 4 ------------------------------------------------------------------------


def _kink_function(rng, c):
    """l * a on {l >= 0} and 0 on {l <= 0}: continuous with a quadratic piece."""
    n = c.ambient_dim
    while True:
        l = random_form(rng, n, slope=2, const=2)
        if not la.is_zero(l.linear):
            break
    a = random_form(rng, n, slope=2, const=2)
    c2, f0 = refine(c, TropicalPolynomial("max", tuple(sorted({l, AffineForm.const(n, 0)}))))
    quad = tuple(tuple(l.linear[i] * a.linear[j] + a.linear[i] * l.linear[j] for j in range(n)) for i in range(n))
    lin = la.add(la.scale(l.constant, a.linear), la.scale(a.constant, l.linear))
    prod = QuadraticForm(quad, lin, l.constant * a.constant)
    pieces = {}
    for s in c2.maximal:
        pieces[s] = prod if f0.pieces[s].as_affine() == l else QuadraticForm.affine(AffineForm.const(n, 0))
    return PiecewiseFunction(c2, pieces)


def _quadratic_plus_convex(rng, c):
    n = c.ambient_dim
    _, f = refine(c, random_polynomial(rng, n, 3))
    m = tuple(rng.randint(-2, 2) for _ in range(n))
    sign = rng.choice([-1, 1])
    q = QuadraticForm(tuple(tuple(sign * 2 * m[i] * m[j] for j in range(n)) for i in range(n)), la.zero(n), 0)
    return PiecewiseFunction(f.cycle, {s: f.pieces[s] + q for s in f.cycle.maximal})


def test_criterion_4_psh_consistency(criterion_log):
    rng = random.Random(404)
    with criterion(criterion_log, 4, "check_psh agrees with PSD minors and oracle weights") as stats:
        verdicts = {True: 0, False: 0}
        kinds = {"pl": 0, "convex": 0, "kink": 0, "quadratic": 0}
        for i in range(120):
            kind = list(kinds)[i % 4]
            c = random_cycle(rng, rng.choice([2, 3]))
            if kind == "pl":
                f = random_pl_function(rng, c)
            elif kind == "convex":
                _, f = refine(c, random_polynomial(rng, c.ambient_dim, 4))
            elif kind == "kink":
                f = _kink_function(rng, c)
            else:
                f = _quadratic_plus_convex(rng, c)
            if len(f.cycle.maximal) > MAX_CELLS:
                continue
            got = bool(check_psh(f))
            assert got == oracle_psh(f, rng)
            verdicts[got] += 1
            kinds[kind] += 1
        total = sum(kinds.values())
        stats.update(instances=total, psh=verdicts[True], not_psh=verdicts[False], **kinds)
        assert total >= 100 and verdicts[True] and verdicts[False]


# -- 5 ------------------------------------------------------------------------


def _generic_for_both(rng, a, b):
    n = a.ambient_dim
    s = a.maximal[rng.randrange(len(a.maximal))]
    p = a.cells[s].relative_interior_point()
    for _ in range(200):
        normal = tuple(rng.randint(-3, 3) for _ in range(n))
        if not any(normal):
            continue
        x = la.add(p, tuple(F(rng.randint(-2, 2), rng.randint(1, 3)) for _ in range(n)))
        h = RationalHyperplane.through(normal, x)
        if is_generic(a, h) and (b is None or is_generic(b, h)):
            return h
    raise Exhausted("no hyperplane generic for both cycles")


def test_criterion_5_projection_formula(criterion_log):
    rng = random.Random(505)
    with criterion(criterion_log, 5, "projection formula f'.(C.H) = (f.C).H") as stats:
        done = nonempty = effective = 0
        while done < 100:
            n = rng.choice([3, 3, 4])
            c = random_cycle(rng, n)
            if c.dim < 2:
                continue
            f = random_pl_function(rng, c)
            if len(f.cycle.maximal) > MAX_CELLS:
                continue
            cl = corner_locus(f)
            h = _generic_for_both(rng, f.cycle, cl.cycle if cl.faces else None)
            hc = stable_intersect(f.cycle, h)
            if hc.maximal:
                assert hc.dim == c.dim - 1
                if c.is_effective:
                    assert hc.is_effective
                    effective += 1
                nonempty += 1
                g = corner_locus(restrict(f, hc))
                lhs = g.cycle if g.faces else empty_cycle(n, c.dim - 2)
            else:
                lhs = empty_cycle(n, c.dim - 2)
            rhs = stable_intersect(cl.cycle, h) if cl.faces else empty_cycle(n, c.dim - 2)
            assert cycles_equal(lhs, rhs)
            done += 1
        stats.update(instances=done, nonempty_slices=nonempty, effective_inputs=effective)
        assert nonempty >= 50


# -- 6 ------------------------------------------------------------------------


def _psh_with_local_max(rng):
    """A convex function on an effective cycle whose terms are dominated near omega."""
    c = random_cycle(rng, rng.choice([2, 3]))
    while not c.is_effective:
        c = random_cycle(rng, rng.choice([2, 3]))
    n = c.ambient_dim
    s = c.maximal[rng.randrange(len(c.maximal))]
    cell = c.cells[s]
    omega = rng.choice(list(cell.vertices) + [cell.relative_interior_point()])
    forms = [AffineForm.const(n, 0)]
    for _ in range(rng.randint(1, 3)):
        g = random_form(rng, n)
        # push g below zero at omega, sometimes only just touching it
        shift = g(omega) + rng.choice([0, 0, F(1, 2), 1, 3])
        forms.append(AffineForm(g.linear, g.constant - shift))
    polys = [TropicalPolynomial("max", tuple(sorted(set(forms))))]
    if rng.random() < 0.3:
        polys.append(random_polynomial(rng, n, 3))
    _, fs = refine_all(c, polys)
    f = combine(fs, [1] * len(fs))
    # add a global linear form vanishing on every direction at omega, when there is one
    dirs = [d for t in f.cycle.maximal_containing(omega) for d in f.cycle.cells[t].direction_basis()]
    ker = la.integer_kernel(dirs, n) if dirs else [tuple(int(i == j) for j in range(n)) for i in range(n)]
    if ker and rng.random() < 0.5:
        a = la.zero(n)
        for k in ker:
            a = la.add(a, la.scale(rng.randint(-2, 2), k))
        f = f + QuadraticForm.affine(AffineForm(a, 0))
    return f, omega


def _strict_max_not_psh(rng):
    """-max(x_1, ..., x_n, -sum x) on a random fan: a strict maximum at the origin."""
    n = rng.choice([2, 3])
    c = random_fan(rng, n)
    forms = [AffineForm(tuple(int(i == j) for j in range(n))) for i in range(n)]
    forms.append(AffineForm(tuple([-1] * n)))
    _, f = refine(c, TropicalPolynomial("max", tuple(sorted(forms))))
    return combine([f], [-1])


def _on_rays(c, slopes):
    pieces = {}
    for s, sl in zip(c.maximal, slopes):
        r = c.cells[s].rays[0]
        k = next(i for i, a in enumerate(r) if a)
        lin = [F(0)] * c.ambient_dim
        lin[k] = F(sl) / r[k]
        pieces[s] = QuadraticForm(None, tuple(lin), F(0))
    return PiecewiseFunction(c, pieces)


def test_criterion_6_maximum_principle(criterion_log):
    rng = random.Random(606)
    with criterion(criterion_log, 6, "tropical maximum principle") as stats:
        certified = tried = 0
        while certified < 500:
            f, omega = _psh_with_local_max(rng)
            tried += 1
            v = verify_max_principle(f, omega)
            assert v.status != "NotLocallyConstant", (f, omega)
            if v.status == "LocallyConstant":
                assert is_local_max(f, omega) and check_psh(f)
                certified += 1

        strict = 0
        while strict < 25:
            f = _strict_max_not_psh(rng)
            origin = la.zero(f.cycle.ambient_dim)
            assert is_local_max(f, origin)
            for s in f.cycle.maximal:
                for d in f.cycle.cells[s].generators():
                    assert f.pieces[s](d) < 0
            assert verify_max_principle(f, origin).status == "NotPsh"
            strict += 1

        # d = 1: every slope vector with |s| <= 3 on fans with 2..6 rays.  Outside the
        # nonpositive orthant a positive slope must block the local maximum; inside it
        # psh-ness is sum(w s) >= 0, which forces every slope to vanish.
        swept = 0
        for k in range(2, 7):
            if k == 2:
                c = make_cycle([(ray(1, 2, -1), 2), (ray(-1, -2, 1), 2)])
            else:
                c = line_fan(rng, 3, rays=k)
                while len(c.maximal) != k:
                    c = line_fan(rng, 3, rays=k)
            weights = [c.weights[s] for s in c.maximal]
            for sl in itertools.product(range(-3, 4), repeat=k):
                f = _on_rays(c, sl)
                if max(sl) > 0:
                    rep = is_local_max(f, (0, 0, 0))
                    assert not rep and rep.blocking_direction.value > 0
                else:
                    v = verify_max_principle(f, (0, 0, 0))
                    psh = sum(w * s for w, s in zip(weights, sl)) >= 0
                    assert (v.status != "NotPsh") == psh
                    assert (v.status == "LocallyConstant") == (not any(sl))
                    assert v.status != "NotLocallyConstant"
                swept += 1
        stats.update(certified_local_maxima=certified, drawn=tried, strict_non_psh=strict, d1_slope_vectors=swept)


# -- 7 ------------------------------------------------------------------------


def _trace_instance(rng):
    """A fan with a function that vanishes on it, written on a finer subdivision."""
    n = rng.choice([2, 3, 3, 4])
    c = random_fan(rng, n)
    polys = [TropicalPolynomial("max", tuple(sorted({AffineForm(random_form(rng, n).linear), AffineForm.const(n, 0)})))]
    c2, (g,) = refine_all(c, polys)
    f = combine([g, g], [1, -1])
    dirs = [d for s in c2.maximal for d in c2.cells[s].direction_basis()]
    ker = la.integer_kernel(dirs, n)
    if ker:
        f = f + QuadraticForm.affine(AffineForm(ker[0], 0))
    return f


def test_criterion_7_trace_soundness(criterion_log):
    rng = random.Random(707)
    with criterion(criterion_log, 7, "slicing traces re-check and are reproducible") as stats:
        ladders = {}
        for i in range(50):
            f = _trace_instance(rng)
            t1 = slicing_trace(f.cycle, f, seed=i, descend=True)
            assert recheck_trace(t1) == []
            dims = [node.dim for node in t1.nodes()]
            assert dims == list(range(dims[0], dims[0] - len(dims), -1)) and dims[-1] <= 1
            t2 = slicing_trace(f.cycle, f, seed=i, descend=True)
            assert dumps(trace_to_dict(t1)) == dumps(trace_to_dict(t2))
            ladders[len(dims)] = ladders.get(len(dims), 0) + 1
        stats.update(traces=50, ladder_lengths=dict(sorted(ladders.items())))


# -- 8 ------------------------------------------------------------------------


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def _poly_doc(p):
    terms = [{"m": [str(a) for a in t.linear], "c": str(t.constant)} for t in p.terms]
    return dumps({"format_version": "1", "kind": "tropical_polynomial", "mode": p.mode, "terms": terms})


def test_criterion_8_cli_round_trip(criterion_log, tmp_path):
    rng = random.Random(808)
    with criterion(criterion_log, 8, "CLI documents round-trip and runs are deterministic") as stats:
        emitted = runs = 0
        for i in range(25):
            c = random_cycle(rng)
            src = tmp_path / f"c{i}.json"
            write_cycle(src, c)
            assert load_cycle(src).cycle == c
            n = c.ambient_dim
            s = c.maximal[rng.randrange(len(c.maximal))]
            p = c.cells[s].relative_interior_point()
            poly = random_polynomial(rng, n, 3)
            fn = tmp_path / f"f{i}.json"
            fn.write_text(_poly_doc(poly))
            normal = tuple(int(a) for a in la.primitive_vector(tuple(rng.randint(-3, 3) or 1 for _ in range(n))))
            commands = [
                ["star", src, "--point=" + ",".join(str(a) for a in p)],
                ["corner-locus", src, fn],
                ["slice", src, "--normal=" + ",".join(map(str, normal)), "--offset=" + str(F(rng.randint(-4, 4), 2))],
            ]
            for j, cmd in enumerate(commands):
                out = tmp_path / f"o{i}_{j}.json"
                first = _run(cmd + ["--out", out, "--json", "--seed", i])
                if first[0] == 2:
                    continue
                text = out.read_text() if out.exists() else None
                second = _run(cmd + ["--out", out, "--json", "--seed", i])
                assert first == second
                runs += 1
                if text is None:
                    continue
                assert out.read_text() == text
                again = load_cycle(out).cycle
                assert dumps(cycle_to_dict(again)) == text
                emitted += 1
            for cmd in (["sample-hyperplane", src, "--through=" + ",".join(str(a) for a in p)], ["balance", src]):
                assert _run(cmd + ["--json", "--seed", i]) == _run(cmd + ["--json", "--seed", i])
                runs += 1
        stats.update(emitted_documents=emitted, repeated_runs=runs)
        assert emitted >= 50
