"""Brute-force AC nodal-analysis oracle for gm-C netlists.

Assembles the KCL equations of a netlist at one angular frequency and solves
them by dense Gaussian elimination with partial pivoting, in complex double
precision. Nothing here knows about closed-form transfer functions; that is
the point, it is the independent check for them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import FrequencyResponse, as_frequencies
from .errors import InvalidParameterError, SingularSystemError
from .netlist import GROUND, GmCNetlist


@dataclass(frozen=True)
class SolveOptions:
    """Pivot tolerance is relative to the largest assembled entry of a column."""

    pivot_tolerance: float = 1e-14


@dataclass
class ComplexMatrixSystem:
    """A v = b over the non-ground nodes; row/column i maps to node i+1."""

    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def stamp(netlist: GmCNetlist, omega: float) -> ComplexMatrixSystem:
    """Assemble KCL rows (currents leaving each non-ground node sum to zero).

    The input node's row is replaced by the constraint v_input = 1.
    """
    n = netlist.node_count - 1
    a = np.zeros((n, n), dtype=complex)
    b = np.zeros(n, dtype=complex)

    def add(row: int, col: int, value: complex) -> None:
        if row != GROUND and col != GROUND:
            a[row - 1, col - 1] += value

    for cap in netlist.capacitors:
        y = 1j * omega * cap.c
        add(cap.a, cap.a, y)
        add(cap.a, cap.b, -y)
        add(cap.b, cap.b, y)
        add(cap.b, cap.a, -y)

    for cond in netlist.conductances:
        add(cond.a, cond.a, cond.g)
        add(cond.a, cond.b, -cond.g)
        add(cond.b, cond.b, cond.g)
        add(cond.b, cond.a, -cond.g)

    for t in netlist.transconductors:
        # gm*(v+ - v-) enters out_src and leaves out_snk.
        add(t.out_src, t.v_plus, -t.gm)
        add(t.out_src, t.v_minus, t.gm)
        add(t.out_snk, t.v_plus, t.gm)
        add(t.out_snk, t.v_minus, -t.gm)

    i = netlist.input_node - 1
    a[i, :] = 0.0
    a[i, i] = 1.0
    b[i] = 1.0
    return ComplexMatrixSystem(a, b)


def solve(system: ComplexMatrixSystem, options: SolveOptions | None = None) -> np.ndarray:
    """Node voltages by Gaussian elimination with partial pivoting."""
    options = options or SolveOptions()
    a = system.matrix.astype(complex, copy=True)
    b = system.rhs.astype(complex, copy=True)
    n = system.dimension
    col_scale = np.max(np.abs(a), axis=0)

    def singular(col: int) -> SingularSystemError:
        node = col + 1
        return SingularSystemError(
            f"singular nodal system: no usable pivot for node {node} "
            "(floating node or degenerate frequency)",
            node=node,
        )

    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        pivot = abs(a[p, k])
        if col_scale[k] == 0.0 or pivot <= options.pivot_tolerance * col_scale[k]:
            raise singular(k)
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(factors, a[k, k:])
        b[k + 1 :] -= factors * b[k]

    v = np.zeros(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        v[k] = (b[k] - np.dot(a[k, k + 1 :], v[k + 1 :])) / a[k, k]
    return v


def _read_probe(netlist: GmCNetlist, probe_label: str, voltages: np.ndarray) -> complex:
    def volt(node: int) -> complex:
        return 0j if node == GROUND else complex(voltages[node - 1])

    if probe_label in netlist.probes:
        probe = netlist.probes[probe_label]
        if isinstance(probe, tuple):
            plus, minus = probe
            return volt(plus) - volt(minus)
        return volt(probe)
    if probe_label in netlist.current_probes:
        t = netlist.transconductors[netlist.current_probes[probe_label]]
        return t.gm * (volt(t.v_plus) - volt(t.v_minus))
    raise InvalidParameterError(
        f"unknown probe {probe_label!r}; available: {netlist.probe_labels}"
    )


def solve_at(
    netlist: GmCNetlist,
    probe_label: str,
    freq_hz: float,
    options: SolveOptions | None = None,
) -> complex:
    """Stamp and solve at one frequency, returning the probed value."""
    try:
        voltages = solve(stamp(netlist, 2.0 * np.pi * freq_hz), options)
    except SingularSystemError as err:
        raise SingularSystemError(
            f"{err} at {freq_hz} Hz", node=err.node, freq_hz=freq_hz
        ) from err
    return _read_probe(netlist, probe_label, voltages)


def response(
    netlist: GmCNetlist,
    probe_label: str,
    grid,
    options: SolveOptions | None = None,
) -> FrequencyResponse:
    """Per-frequency stamp/solve/read; frequencies are independent solves."""
    freqs = as_frequencies(grid)
    values = [solve_at(netlist, probe_label, f, options) for f in freqs]
    return FrequencyResponse(freqs, np.asarray(values, dtype=complex))
