"""Link context, wavelength assignments and per-channel crosstalk."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import noise
from .grid import (
    DwdmParams,
    NoiseMode,
    QkdParams,
    RamanCrossSectionTable,
    ScenarioConfig,
    Structure,
    WavelengthGrid,
    beta,
    launch_power_w,
)
from .noise import Direction, NoiseBreakdown


class AssignmentError(ValueError):
    """An assignment breaks the wavelength-sharing rules of its structure."""


@dataclass(frozen=True)
class Assignment:
    """Grid indices of each channel set.

    ``classical_a`` carries Alice->Bob data, ``classical_b`` Bob->Alice data.
    ``quantum_u1`` sends from Alice, ``quantum_u2`` from Bob (dual fiber only).
    """

    classical_a: tuple[int, ...]
    classical_b: tuple[int, ...]
    quantum_u1: tuple[int, ...]
    quantum_u2: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("classical_a", "classical_b", "quantum_u1", "quantum_u2"):
            object.__setattr__(self, name, tuple(sorted(int(i) for i in getattr(self, name))))

    @classmethod
    def bidirectional(cls, classical, quantum) -> Assignment:
        return cls(tuple(classical), tuple(classical), tuple(quantum), ())

    @property
    def m(self) -> int:
        return len(self.quantum_u1) + len(self.quantum_u2)

    @property
    def n(self) -> int:
        return len(self.classical_a)

    def quantum_channels(self) -> list[tuple[int, bool]]:
        """``(grid index, sent by Bob)`` for every quantum channel, U1 first."""
        return [(q, False) for q in self.quantum_u1] + [(q, True) for q in self.quantum_u2]

    def validate(self, structure: Structure, grid_size: int) -> None:
        sets = (self.classical_a, self.classical_b, self.quantum_u1, self.quantum_u2)
        for s in sets:
            if len(set(s)) != len(s):
                raise AssignmentError(f"repeated index in {s}")
            if any(i < 0 or i >= grid_size for i in s):
                raise AssignmentError(f"index out of range 0..{grid_size - 1} in {s}")
        if len(self.classical_a) != len(self.classical_b):
            raise AssignmentError("forward and backward classical sets differ in size")
        a, b = set(self.classical_a), set(self.classical_b)
        u1, u2 = set(self.quantum_u1), set(self.quantum_u2)
        if structure is Structure.FULL_DUPLEX:
            if u2:
                raise AssignmentError("full-duplex plans send all quantum signals from Alice")
            if u1 & (a | b):
                raise AssignmentError(f"quantum on a classical wavelength: {sorted(u1 & (a | b))}")
        else:
            if u1 & a:
                raise AssignmentError(f"forward fiber collision at {sorted(u1 & a)}")
            if u2 & b:
                raise AssignmentError(f"backward fiber collision at {sorted(u2 & b)}")


@dataclass(frozen=True)
class LinkContext:
    """Everything needed to turn an assignment into photon counts and rates."""

    grid: WavelengthGrid
    table: RamanCrossSectionTable
    qkd: QkdParams = field(default_factory=QkdParams)
    dwdm: DwdmParams = field(default_factory=DwdmParams)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)

    def with_scenario(self, **changes) -> LinkContext:
        return replace(self, scenario=replace(self.scenario, **changes))

    def with_dwdm(self, **changes) -> LinkContext:
        return replace(self, dwdm=replace(self.dwdm, **changes))

    @property
    def adjacent(self) -> bool:
        return self.scenario.noise_mode is NoiseMode.RAMAN_PLUS_ADJACENT

    @property
    def full_duplex(self) -> bool:
        return self.scenario.structure is Structure.FULL_DUPLEX

    @cached_property
    def launch_power(self) -> float:
        return launch_power_w(self.dwdm)

    @cached_property
    def wavelengths(self) -> np.ndarray:
        return self.grid.wavelengths_nm

    @cached_property
    def delta_lambda_nm(self) -> float:
        """NBF bandwidth in nm, fixed at the grid centre so C_f, C_b stay wavelength-free."""
        centre = 0.5 * (self.grid.channels[0] + self.grid.channels[-1])
        return self.dwdm.delta_lambda_nm(centre)

    @cached_property
    def raman_constants(self) -> tuple[float, float]:
        return noise.raman_constants(self.launch_power, self.dwdm, self.delta_lambda_nm, self.qkd)

    @cached_property
    def raman_weights(self) -> np.ndarray:
        """``lambda_j * beta(lambda_i, lambda_j)``: classical row i, quantum column j."""
        lam = self.wavelengths
        return lam[None, :] * beta(self.table, lam[:, None], lam[None, :])

    @cached_property
    def adjacent_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Co- and counter-propagating adjacent-leak photon counts, row i -> column j."""
        d = self.grid.count
        fc = np.zeros((d, d))
        bc = np.zeros((d, d))
        if not self.adjacent:
            return fc, bc
        I = self.launch_power
        p_co = noise.adjacent_crosstalk_power(Direction.CO_PROPAGATING, I, self.dwdm, 1)
        p_ctr = noise.adjacent_crosstalk_power(Direction.COUNTER_PROPAGATING, I, self.dwdm, 1)
        for i in range(d):
            for j in (i - 1, i + 1):
                if 0 <= j < d:
                    fc[i, j] = noise.photon_count(p_co, self.wavelengths[j], self.qkd)
                    bc[i, j] = noise.photon_count(p_ctr, self.wavelengths[j], self.qkd)
        return fc, bc

    @cached_property
    def forward_counts(self) -> np.ndarray:
        """Photons on quantum j from one co-propagating classical channel i."""
        fc, _ = self.adjacent_counts
        return self.raman_constants[0] * self.raman_weights + fc

    @cached_property
    def backward_counts(self) -> np.ndarray:
        """Photons on quantum j from one counter-propagating classical channel i."""
        _, bc = self.adjacent_counts
        return self.raman_constants[1] * self.raman_weights + bc

    @cached_property
    def pair_counts(self) -> np.ndarray:
        """Photons on quantum j from classical wavelength i as seen in this structure.

        Full duplex assumes bidirectional data channels (A = B), so a classical
        wavelength contributes both directions; dual fiber only the forward one.
        """
        if self.full_duplex:
            return self.forward_counts + self.backward_counts
        return self.forward_counts.copy()


def _pair_noise(ctx: LinkContext, classical: int, q: int, co: bool) -> NoiseBreakdown:
    lam_c, lam_q = ctx.grid.wavelength(classical), ctx.grid.wavelength(q)
    dl = ctx.delta_lambda_nm
    b = beta(ctx.table, lam_c, lam_q)
    I = ctx.launch_power
    sep = abs(classical - q)
    if co:
        p_r = noise.raman_photon_count(noise.forward_raman_power(I, ctx.dwdm, b, dl), lam_q, ctx.qkd)
        leak = 0.0
        if ctx.adjacent:
            leak = noise.adjacent_crosstalk_power(Direction.CO_PROPAGATING, I, ctx.dwdm, sep)
        return NoiseBreakdown(p_fr=p_r, p_fc=noise.photon_count(leak, lam_q, ctx.qkd))
    p_r = noise.raman_photon_count(noise.backward_raman_power(I, ctx.dwdm, b, dl), lam_q, ctx.qkd)
    leak = 0.0
    if ctx.adjacent:
        leak = noise.adjacent_crosstalk_power(Direction.COUNTER_PROPAGATING, I, ctx.dwdm, sep)
    return NoiseBreakdown(p_br=p_r, p_bc=noise.photon_count(leak, lam_q, ctx.qkd))


def channel_noise(
    assignment: Assignment, q: int, ctx: LinkContext, from_bob: bool = False
) -> NoiseBreakdown:
    """Crosstalk on the quantum channel at grid index ``q``.

    ``from_bob`` selects the U2 copy of ``q`` in a dual-fiber plan. Summation
    runs pair by pair through the scalar noise formulas.
    """
    structure = ctx.scenario.structure
    assignment.validate(structure, ctx.grid.count)
    owner = assignment.quantum_u2 if from_bob else assignment.quantum_u1
    if q not in owner:
        raise AssignmentError(f"{q} is not a quantum channel of {'U2' if from_bob else 'U1'}")
    if structure is Structure.FULL_DUPLEX:
        co, counter = assignment.classical_a, assignment.classical_b
    else:
        co, counter = (assignment.classical_b if from_bob else assignment.classical_a), ()
    total = NoiseBreakdown()
    for c in co:
        total = total + _pair_noise(ctx, c, q, co=True)
    for c in counter:
        total = total + _pair_noise(ctx, c, q, co=False)
    return total
