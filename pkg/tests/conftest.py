"""Shared fixtures and random-system generators for the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from ddattack.linsys import LtiSystem

SHIFT_A = [[0.0, 1.0], [0.0, 0.0]]


def shift_system(B=((0.0,), (0.0,)), C=((1.0, 0.0),), D=None) -> LtiSystem:
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    return LtiSystem(np.array(SHIFT_A), B, C, D)


@dataclass
class Planted:
    """A random system with known structure, used as an oracle."""

    sys: LtiSystem
    mu: int  # number of distinct eigenvalues (A is diagonalizable)
    observable_dim: int


def _modal_blocks(rng, n, repeat, gap=0.25):
    for _ in range(1000):
        blocks = _try_modal_blocks(rng, n, repeat, gap)
        if blocks is not None:
            return blocks
    raise RuntimeError("could not place well separated eigenvalues")


def _try_modal_blocks(rng, n, repeat, gap):
    """Real block-diagonal A with eigenvalues of modulus in [0.8, 1] at least ``gap`` apart.

    Repeated blocks (``repeat=True``) copy an earlier block exactly.
    """
    radii = [0.8, 0.85, 0.9, 0.95, 1.0]
    angles = np.linspace(0.35, 2.8, 8)
    eig_blocks, used, eigs = [], [], []
    size = 0
    for _ in range(200):
        if size >= n:
            return eig_blocks
        if repeat and used and rng.random() < 0.35:
            blk = used[rng.integers(len(used))]
            if size + blk.shape[0] <= n:
                eig_blocks.append(blk)
                size += blk.shape[0]
            continue
        if n - size >= 2 and rng.random() < 0.5:
            r, th = rng.choice(radii), rng.choice(angles)
            blk = r * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        else:
            blk = np.array([[rng.choice(radii) * rng.choice([-1.0, 1.0])]])
        new = np.linalg.eigvals(blk)
        if any(abs(a - b) < gap for a in new for b in eigs):
            continue
        eigs.extend(new)
        used.append(blk)
        eig_blocks.append(blk)
        size += blk.shape[0]
    return eig_blocks if size >= n else None


def planted_system(rng, n, m, p, *, repeat=False, hidden=0, with_d=False) -> Planted:
    """Random system ``Q diag(blocks) Q^T`` with optional repeated modes and unobservable modes.

    ``hidden`` counts trailing modal blocks made invisible to ``C``.
    """
    blocks = _modal_blocks(rng, n, repeat)
    A_modal = np.zeros((n, n))
    spans, at = [], 0
    for blk in blocks:
        k = blk.shape[0]
        A_modal[at:at + k, at:at + k] = blk
        spans.append((at, at + k))
        at += k
    C_modal = rng.standard_normal((p, n))
    hidden = min(hidden, len(spans) - 1)
    for lo, hi in spans[len(spans) - hidden:]:
        C_modal[:, lo:hi] = 0.0
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = Q @ A_modal @ Q.T
    C = C_modal @ Q.T
    B = rng.standard_normal((n, m))
    D = rng.standard_normal((p, m)) if with_d else None
    sys = LtiSystem(A, B, C, D)
    # oracle values from the modal form
    eigs = np.linalg.eigvals(A_modal)
    distinct = []
    for lam in eigs:
        if not any(abs(lam - d) < 1e-9 for d in distinct):
            distinct.append(lam)
    vis = np.linalg.matrix_rank(np.vstack([C_modal @ np.linalg.matrix_power(A_modal, j) for j in range(n)]))
    return Planted(sys, len(distinct), int(vis))


def random_system(rng, n, m, p, with_d=False) -> LtiSystem:
    return planted_system(rng, n, m, p, with_d=with_d).sys


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one PASS/FAIL line per acceptance criterion, printed after the run
_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    if report.when == "call" or report.failed:
        if report.failed or label not in _criteria:
            _criteria[label] = "FAIL" if report.failed else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: (int("".join(c for c in s.split()[0] if c.isdigit())), s)):
        terminalreporter.write_line(f"{_criteria[label]}  {label}")
