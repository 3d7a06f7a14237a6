"""DWDM channel plan, system parameters and the Raman cross-section table."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

C_LIGHT = 299_792_458.0  # m/s
H_PLANCK = 6.62607015e-34  # J s
HC = H_PLANCK * C_LIGHT  # J m, ~1.98645e-25

RAMAN_CSV_HEADER = ("shift_nm", "beta_per_km_nm")


class ConfigError(ValueError):
    """Invalid channel plan or parameter set."""


class RamanTableError(ValueError):
    """Raman cross-section data could not be ingested or evaluated."""


class Structure(str, enum.Enum):
    FULL_DUPLEX = "full_duplex"
    DUAL_FIBER = "dual_fiber"


class NoiseMode(str, enum.Enum):
    RAMAN_ONLY = "raman_only"
    RAMAN_PLUS_ADJACENT = "raman_plus_adjacent"


@dataclass(frozen=True)
class WavelengthGrid:
    channels: tuple[float, ...]  # nm, ascending
    spacing_ghz: float

    def __post_init__(self):
        if len(self.channels) < 2:
            raise ConfigError(f"grid needs at least 2 channels, got {len(self.channels)}")
        if any(b <= a for a, b in zip(self.channels, self.channels[1:])):
            raise ConfigError("grid wavelengths must be strictly increasing")

    @property
    def count(self) -> int:
        return len(self.channels)

    @property
    def wavelengths_nm(self) -> np.ndarray:
        return np.asarray(self.channels, dtype=float)

    def frequencies_ghz(self) -> np.ndarray:
        return C_LIGHT / self.wavelengths_nm  # m/s / nm == GHz

    def wavelength(self, index: int) -> float:
        return self.channels[index]

    def index_of(self, wavelength_nm: float, tol_nm: float = 1e-6) -> int:
        hits = np.flatnonzero(np.abs(self.wavelengths_nm - wavelength_nm) <= tol_nm)
        if hits.size == 0:
            raise KeyError(f"{wavelength_nm} nm is not on the grid")
        return int(hits[0])

    def __len__(self) -> int:
        return len(self.channels)


def build_grid(start_nm: float, end_nm: float, spacing_ghz: float) -> WavelengthGrid:
    """Channel plan anchored at ``start_nm``, stepping down in frequency by
    ``spacing_ghz`` until the wavelength would pass ``end_nm``.

    >>> build_grid(1530, 1565, 200).count
    22
    """
    if not start_nm < end_nm:
        raise ConfigError(f"start_nm ({start_nm}) must be below end_nm ({end_nm})")
    if spacing_ghz <= 0:
        raise ConfigError("spacing_ghz must be positive")
    f0 = C_LIGHT / start_nm  # GHz
    f_end = C_LIGHT / end_nm
    # the small slack keeps an end wavelength that lands exactly on the grid
    steps = math.floor((f0 - f_end) / spacing_ghz + 1e-9)
    freqs = f0 - spacing_ghz * np.arange(steps + 1)
    if freqs.size < 2:
        raise ConfigError(
            f"only {freqs.size} channel fits between {start_nm} and {end_nm} nm "
            f"at {spacing_ghz} GHz spacing"
        )
    return WavelengthGrid(tuple(float(x) for x in C_LIGHT / freqs), float(spacing_ghz))


@dataclass(frozen=True)
class QkdParams:
    """Decoy-state BB84 link parameters. Rates are per ns, times in seconds."""

    mu: float = 0.48
    eta_d: float = 0.3
    gamma_dc: float = 1e-7  # dark counts per ns
    f_ec: float = 1.16
    e_d: float = 0.015
    t_s: float = 250e-12
    t_d: float = 100e-12

    def __post_init__(self):
        for name in ("mu", "eta_d", "gamma_dc", "f_ec", "e_d", "t_s", "t_d"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.eta_d > 1:
            raise ConfigError("eta_d cannot exceed 1")
        if self.e_d >= 0.5:
            raise ConfigError("e_d must be below 0.5")

    @property
    def p_dc(self) -> float:
        """Dark-count probability per gate."""
        return self.gamma_dc * self.t_d * 1e9


@dataclass(frozen=True)
class DwdmParams:
    gamma_a: float = 30.0  # adjacent channel isolation, dB
    chi_a: float = 50.0  # multiplexer directivity, dB
    g_a: float = 10 ** -1.6  # NBF transmission at the adjacent passband
    nbf_bandwidth_ghz: float = 15.0
    alpha_db: float = 0.2  # dB/km
    length_km: float = 45.0
    rx_power_dbm: float = -25.0

    def __post_init__(self):
        if not self.gamma_a > 0 or not self.chi_a > 0:
            raise ConfigError("gamma_a and chi_a must be positive")
        if not 0 < self.g_a <= 1:
            raise ConfigError("g_a must lie in (0, 1]")
        if self.length_km < 0:
            raise ConfigError("length_km must be non-negative")
        if self.alpha_db < 0 or self.nbf_bandwidth_ghz <= 0:
            raise ConfigError("alpha_db must be >= 0 and nbf_bandwidth_ghz > 0")

    @property
    def alpha_lin(self) -> float:
        """Field-power attenuation in 1/km (natural-log units)."""
        return self.alpha_db * math.log(10) / 10

    def delta_lambda_nm(self, wavelength_nm: float) -> float:
        """NBF bandwidth expressed in wavelength units at ``wavelength_nm``."""
        return wavelength_nm**2 * self.nbf_bandwidth_ghz / C_LIGHT


@dataclass(frozen=True)
class ScenarioConfig:
    structure: Structure = Structure.FULL_DUPLEX
    noise_mode: NoiseMode = NoiseMode.RAMAN_ONLY
    m_quantum: int = 1
    n_classical: int = 0
    r_th: float = -1.0  # bit/s; negative disables the per-channel floor

    def __post_init__(self):
        object.__setattr__(self, "structure", Structure(self.structure))
        object.__setattr__(self, "noise_mode", NoiseMode(self.noise_mode))
        if self.m_quantum < 1:
            raise ConfigError("m_quantum must be >= 1")
        if self.n_classical < 0:
            raise ConfigError("n_classical must be >= 0")

    @property
    def k_forward(self) -> int:
        """Quantum channels travelling Alice to Bob."""
        if self.structure is Structure.FULL_DUPLEX:
            return self.m_quantum
        return self.m_quantum // 2


def launch_power_w(dwdm: DwdmParams) -> float:
    """Launch power giving ``rx_power_dbm`` after the fiber span."""
    dbm = dwdm.rx_power_dbm + dwdm.alpha_db * dwdm.length_km
    return 10 ** (dbm / 10) * 1e-3


@dataclass(frozen=True)
class RamanCrossSectionTable:
    shifts_nm: tuple[float, ...]
    betas: tuple[float, ...]  # (km nm)^-1
    pump_reference_nm: float = 1550.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.shifts_nm) != len(self.betas):
            raise RamanTableError("shift and beta columns differ in length")
        if len(self.shifts_nm) < 2:
            raise RamanTableError("need at least two samples")
        if any(b <= a for a, b in zip(self.shifts_nm, self.shifts_nm[1:])):
            raise RamanTableError("shifts must be strictly increasing")
        if any(not b >= 0 for b in self.betas):
            raise RamanTableError("beta must be non-negative")

    @property
    def domain(self) -> tuple[float, float]:
        return self.shifts_nm[0], self.shifts_nm[-1]

    def covers(self, grid: WavelengthGrid) -> bool:
        span = grid.channels[-1] - grid.channels[0]
        lo, hi = self.domain
        return lo <= -span + 1e-9 and hi >= span - 1e-9


def load_raman_table(
    source, grid: WavelengthGrid | None = None, pump_reference_nm: float = 1550.0
) -> RamanCrossSectionTable:
    """Parse a ``shift_nm,beta_per_km_nm`` CSV from bytes, text or a file object.

    Rows are sorted by shift. With ``grid`` given, the table must span every
    pump/signal pair on it, on both the Stokes and anti-Stokes sides.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise RamanTableError("empty Raman CSV") from None
    if tuple(h.strip() for h in header) != RAMAN_CSV_HEADER:
        raise RamanTableError(f"expected header {','.join(RAMAN_CSV_HEADER)}, got {header}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise RamanTableError(f"line {lineno}: expected 2 columns, got {len(row)}")
        try:
            shift, beta_val = float(row[0]), float(row[1])
        except ValueError:
            raise RamanTableError(f"line {lineno}: non-numeric value {row}") from None
        if not (math.isfinite(shift) and math.isfinite(beta_val)):
            raise RamanTableError(f"line {lineno}: non-finite value {row}")
        if beta_val < 0:
            raise RamanTableError(f"line {lineno}: negative beta {beta_val}")
        rows.append((shift, beta_val))
    rows.sort()
    shifts = [r[0] for r in rows]
    if len(set(shifts)) != len(shifts):
        raise RamanTableError("duplicate shift values")
    table = RamanCrossSectionTable(
        tuple(shifts), tuple(r[1] for r in rows), pump_reference_nm
    )
    if grid is not None and not table.covers(grid):
        span = grid.channels[-1] - grid.channels[0]
        raise RamanTableError(
            f"table domain {table.domain} nm does not cover shifts of +/-{span:.3f} nm "
            "needed by the grid"
        )
    return table


def default_raman_table() -> RamanCrossSectionTable:
    """The packaged synthetic cross-section surface (see data/README)."""
    ref = resources.files("qkdwave") / "data" / "raman_synthetic.csv"
    with ref.open("r", encoding="utf-8") as fh:
        table = load_raman_table(fh)
    return RamanCrossSectionTable(
        table.shifts_nm, table.betas, table.pump_reference_nm, label="synthetic"
    )


def beta(table: RamanCrossSectionTable, lambda_pump_nm, lambda_signal_nm):
    """Raman cross section for scattering from the pump into the signal band.

    Shift-only model: the table is indexed by ``signal - pump``, positive on
    the Stokes side. Linear interpolation, no extrapolation. Accepts arrays.
    """
    shift = np.asarray(lambda_signal_nm, dtype=float) - np.asarray(lambda_pump_nm, dtype=float)
    lo, hi = table.domain
    if np.any(shift < lo - 1e-9) or np.any(shift > hi + 1e-9):
        raise RamanTableError(
            f"shift outside table domain [{lo}, {hi}] nm: "
            f"{np.min(shift):.4g}..{np.max(shift):.4g}"
        )
    out = np.interp(shift, table.shifts_nm, table.betas)
    return float(out) if out.ndim == 0 else out
