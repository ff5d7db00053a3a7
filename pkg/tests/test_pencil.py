"""Root counting/finding for (sinh z + z)(sinh z - z), tau, admissibility.

Frozen oracle values (30-digit mpmath Newton, re-derived in
test_frozen_roots_against_mpmath):

    first root, sinh z = -z :  2.250728611601861 + 4.212392230490661 i
    first root, sinh z = +z :  2.768678282987317 + 7.497676277776387 i
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from conebiharm.errors import DomainError, NumericError
from conebiharm.pencil import (
    Branch,
    PencilRoot,
    Rect,
    check_admissibility,
    compute_tau,
    count_roots,
    find_roots,
    tau_root,
)

FIRST_MINUS = 2.250728611601861 + 4.212392230490661j
FIRST_PLUS = 2.768678282987317 + 7.497676277776387j


def winding_oracle(rect: Rect, branch: Branch, n_per_edge: int = 8192) -> int:
    """Independent count: unwrapped phase increment along the boundary."""
    a, b, c, d = rect.re_min, rect.re_max, rect.im_min, rect.im_max
    s = np.linspace(0.0, 1.0, n_per_edge + 1)
    loop = np.concatenate([
        (a + s * (b - a) + 1j * c)[:-1],
        (b + 1j * (c + s * (d - c)))[:-1],
        (b + s * (a - b) + 1j * d)[:-1],
        a + 1j * (d + s * (c - d)),
    ])
    ang = np.unwrap(np.angle(branch.f(loop)))
    return round((ang[-1] - ang[0]) / (2.0 * math.pi))


class TestCounting:
    def test_reference_window(self):
        # the tau window [1,3]x[3,5] holds exactly one root, on the sinh z = -z branch
        rect = Rect(1.0, 3.0, 3.0, 5.0)
        assert count_roots(rect, Branch.MINUS) == 1
        assert count_roots(rect, Branch.PLUS) == 0

    def test_root_free_window(self):
        rect = Rect(0.1, 1.0, 0.0, 1.0)
        assert count_roots(rect, Branch.MINUS) == 0
        assert count_roots(rect, Branch.PLUS) == 0

    def test_zero_area(self):
        assert count_roots(Rect(1.0, 1.0, 0.0, 5.0), Branch.MINUS) == 0
        assert count_roots(Rect(1.0, 3.0, 4.0, 4.0), Branch.PLUS) == 0

    def test_against_phase_winding_oracle(self):
        rng = np.random.RandomState(42)
        for _ in range(20):
            a, b = np.sort(rng.uniform(0.5, 20.0, 2))
            c, d = np.sort(rng.uniform(0.5, 40.0, 2))
            rect = Rect(float(a), float(b), float(c), float(d))
            for branch in Branch:
                assert count_roots(rect, branch) == winding_oracle(rect, branch)

    def test_boundary_near_root_retries_by_inflation(self):
        # top edge passes 1e-9 under the first root: raw clearance fails, the
        # 1% inflation retry then counts the root it moved inside
        rect = Rect(1.0, 3.0, 3.0, FIRST_MINUS.imag - 1e-9)
        assert count_roots(rect, Branch.MINUS) == 1

    def test_degenerate_rect_rejected(self):
        with pytest.raises(DomainError):
            Rect(2.0, 1.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            Rect(0.0, math.inf, 0.0, 1.0)


class TestFinding:
    def test_first_roots_frozen_values(self):
        (root_m,) = find_roots(Rect(1.0, 3.0, 3.0, 5.0), Branch.MINUS)
        assert abs(root_m.z - FIRST_MINUS) < 1e-12
        assert root_m.branch is Branch.MINUS
        assert root_m.residual <= 1e-10
        assert root_m.iterations <= 100

        (root_p,) = find_roots(Rect(1.0, 4.0, 6.0, 9.0), Branch.PLUS)
        assert abs(root_p.z - FIRST_PLUS) < 1e-12

    def test_frozen_roots_against_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 30
        z_m = mp.findroot(lambda z: mp.sinh(z) + z, mp.mpc(2.2, 4.2))
        z_p = mp.findroot(lambda z: mp.sinh(z) - z, mp.mpc(2.8, 7.5))
        assert abs(complex(z_m) - FIRST_MINUS) < 1e-14
        assert abs(complex(z_p) - FIRST_PLUS) < 1e-14

    def test_multi_root_window_bisects(self):
        roots = find_roots(Rect(0.03, 6.0, 0.03, 24.0), Branch.MINUS)
        ims = [r.z.imag for r in roots]
        assert len(roots) == 4
        assert ims == sorted(ims)
        assert ims[0] == pytest.approx(FIRST_MINUS.imag, abs=1e-12)
        # roots of one branch are separated by roughly 2*pi in Im
        gaps = np.diff(ims)
        assert np.all((gaps > 5.0) & (gaps < 7.5))

    def test_cardinality_matches_count_on_random_rects(self):
        # property: |find_roots(R)| == count_roots(R) for 50 random rectangles
        rng = np.random.RandomState(2024)
        checked = 0
        for _ in range(50):
            a, b = np.sort(rng.uniform(0.5, 20.0, 2))
            c, d = np.sort(rng.uniform(0.5, 40.0, 2))
            rect = Rect(float(a), float(b), float(c), float(d))
            branch = Branch.MINUS if rng.rand() < 0.5 else Branch.PLUS
            roots = find_roots(rect, branch)
            assert len(roots) == count_roots(rect, branch)
            checked += len(roots)
        assert checked > 10  # the sweep actually exercised nonempty windows

    def test_conjugate_quadruple_symmetry(self):
        # f(conj z) = conj f(z) and f(-z) = -f(z): residuals vanish on the
        # whole quadruple {z, -z, conj z, -conj z}
        for branch, z in ((Branch.MINUS, FIRST_MINUS), (Branch.PLUS, FIRST_PLUS)):
            for mate in (z, -z, z.conjugate(), -z.conjugate()):
                assert abs(branch.f(mate)) < 1e-12

    def test_root_invariants_enforced(self):
        with pytest.raises(NumericError):
            PencilRoot(z=2.0 + 4.0j, branch=Branch.MINUS, residual=1e-6, iterations=3)
        with pytest.raises(DomainError):
            PencilRoot(z=-2.0 + 4.0j, branch=Branch.MINUS, residual=1e-12, iterations=3)


class TestTau:
    def test_value_and_certificate(self):
        tau = compute_tau()
        assert tau == pytest.approx(4.21239, abs=5e-4)
        root = tau_root()
        assert root.branch is Branch.MINUS
        assert abs(root.z - FIRST_MINUS) < 1e-12
        assert root.residual <= 1e-10

    def test_fast_and_memoized(self):
        import time

        tau_root.cache_clear()
        t0 = time.time()
        compute_tau()
        first = time.time() - t0
        t0 = time.time()
        for _ in range(100):
            compute_tau()
        cached = time.time() - t0
        assert first < 1.0
        assert cached < 0.01

    def test_tau_is_minimum_over_both_branches(self):
        tau = compute_tau()
        for branch in Branch:
            roots = find_roots(Rect(0.03, 6.0, 0.03, 12.0), branch)
            assert all(r.z.imag >= tau - 1e-12 for r in roots)


class TestAdmissibility:
    def test_reference_pairs(self):
        rep = check_admissibility(math.pi / 2.0, 2.0)
        assert rep.admissible and rep.lhs == pytest.approx(math.pi, abs=1e-12)

        rep = check_admissibility(math.pi, 2.0)
        assert not rep.admissible
        assert rep.case == 2
        assert rep.p_max == pytest.approx(1.2055, abs=1e-3)

        rep = check_admissibility(math.pi, 1.1)
        assert rep.admissible  # lhs = pi * (3 - 2/1.1) ~ 3.71 < tau

    def test_case_split(self):
        tau = compute_tau()
        assert check_admissibility(tau / 3.0, 7.3).case == 1
        assert check_admissibility(tau / 3.0 + 1e-9, 7.3).case == 2
        # case 1 means no finite bound: admissible for every p, p_max None
        rep = check_admissibility(0.4 * math.pi, 100.0)
        assert rep.case == 1 and rep.p_max is None and rep.admissible

    def test_at_tau_third_all_p_admissible(self):
        tau = compute_tau()
        for p in (1.001, 1.1, 2.0, 10.0, 1e6):
            assert check_admissibility(tau / 3.0, p).admissible

    def test_strict_inequality_at_equality(self):
        # omega = tau/2, p = 2 gives lhs == tau exactly in floating point
        tau = compute_tau()
        rep = check_admissibility(tau / 2.0, 2.0)
        assert rep.lhs == tau
        assert not rep.admissible

    def test_monotone_in_p(self):
        # property: fixing omega, admissibility survives decreasing p toward 1
        rng = np.random.RandomState(5)
        for _ in range(50):
            omega = float(rng.uniform(0.05, 2.0 * math.pi))
            p = float(rng.uniform(1.01, 30.0))
            rep = check_admissibility(omega, p)
            if rep.admissible:
                smaller = check_admissibility(omega, 1.0 + 0.5 * (p - 1.0))
                assert smaller.admissible

    def test_beyond_tau_no_admissible_p(self):
        tau = compute_tau()
        rep = check_admissibility(tau + 0.1, 1.01)
        assert rep.case == 2
        assert rep.p_max is not None and rep.p_max <= 1.0
        assert not rep.admissible

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            check_admissibility(0.0, 2.0)
        with pytest.raises(DomainError):
            check_admissibility(2.0 * math.pi + 0.2, 2.0)
        with pytest.raises(DomainError):
            check_admissibility(1.0, 1.0)
