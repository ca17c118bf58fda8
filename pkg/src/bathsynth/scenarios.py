"""Scenario configuration and the five reproducible runs behind the CLI.

A config file is INI text with one section named after the scenario::

    [decay]
    kappa = 0.11
    delta = 0.16
    num_levels = 501
    fit_window = 3, 10

Unknown keys, malformed values and out-of-range parameters are reported with
the line they came from. Every check runs before any numerical work.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import tables
from .lanczos import max_safe_length, synthesize_bath
from .lindblad import FockDensityMatrix, build_generators, integrate
from .multiphoton import PhotonConfig, peak_of, two_photon_trace
from .network import DimerSpec, StarBathSpec, attach_chain_bath, build_coupler
from .propagator import (Propagator, dimer_propagators, fit_decay, first_peak,
                         site_intensities)

SCENARIOS = ("synth-bath", "decay", "dimer", "two-photon", "lindblad-compare")

# below this distance the anchor decays quadratically rather than exponentially
ZENO_EDGE = 3.0


class ConfigError(ValueError):
    """Invalid scenario configuration; ``line`` points into the source file."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source and line:
            where = f"{source}:{line}: "
        elif line:
            where = f"line {line}: "
        super().__init__(where + message)


@dataclass
class ScenarioConfig:
    """Fully resolved parameters of one run.

    ``gamma_target`` selects the loss: ``None`` keeps ``kappa`` as given,
    ``0`` drops the bath (bare Hermitian coupler) and a positive value sets
    ``kappa = sqrt(gamma_target * delta / pi)`` so the bath decays at that
    amplitude rate.
    """

    scenario: str
    kappa: float = 0.11
    delta: float = 0.16
    num_levels: int = 121
    truncation: int = 50
    J0: float = 0.3
    gamma_target: float | None = None
    z_start: float = 0.0
    z_end: float = 10.0
    z_step: float = 0.01
    input_site: int = 0
    photons: tuple = (2, 0)
    fit_window: tuple = (3.0, 10.0)
    bound: float = 2e-2
    lindblad_step: float = 1e-3
    chain_table: str | None = None
    out: str | None = None
    _lines: dict = field(default_factory=dict, repr=False, compare=False)
    _source: str | None = field(default=None, repr=False, compare=False)

    # --- INI round trip ----------------------------------------------------

    def to_ini(self) -> str:
        lines = [f"[{self.scenario}]"]
        for key, value in self.items():
            lines.append(f"{key} = {_emit(value)}")
        return "\n".join(lines) + "\n"

    def items(self):
        for f in dataclasses.fields(self):
            if f.name in ("scenario",) or f.name.startswith("_"):
                continue
            yield f.name, getattr(self, f.name)

    @classmethod
    def from_ini(cls, text: str, scenario: str | None = None,
                 source: str | None = None) -> "ScenarioConfig":
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            parser.read_string(text, source=source or "<config>")
        except configparser.Error as exc:
            raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None),
                              source) from None
        lines = _key_lines(text)
        sections = parser.sections()
        if scenario is None:
            if len(sections) != 1:
                raise ConfigError(f"expected exactly one scenario section, found {sections}",
                                  None, source)
            scenario = sections[0]
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario [{scenario}]; choose from {', '.join(SCENARIOS)}",
                              lines.get((scenario, None)), source)
        others = [s for s in sections if s != scenario]
        if others:
            raise ConfigError(f"section [{others[0]}] does not match scenario {scenario!r}",
                              lines.get((others[0], None)), source)
        values = dict(parser[scenario]) if parser.has_section(scenario) else {}
        where = {k: lines.get((scenario, k)) for k in values}
        return cls.from_mapping(scenario, values, where, source)

    @classmethod
    def from_mapping(cls, scenario: str, values: dict, where: dict | None = None,
                     source: str | None = None) -> "ScenarioConfig":
        where = where or {}
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
        cfg = cls(scenario)
        cfg._source = source
        for key, raw in values.items():
            line = where.get(key)
            if key not in _PARSERS:
                raise ConfigError(f"unknown key {key!r}", line, source)
            try:
                setattr(cfg, key, _PARSERS[key](str(raw).strip()))
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}", line, source) from None
            cfg._lines[key] = line
        cfg.validate()
        return cfg

    def with_overrides(self, overrides: dict) -> "ScenarioConfig":
        values = {k: _emit(v) for k, v in self.items()}
        values.update(overrides)
        where = dict(self._lines)
        for k in overrides:
            where[k] = None
        return ScenarioConfig.from_mapping(self.scenario, values, where, self._source)

    # --- validation --------------------------------------------------------

    def _fail(self, key: str, message: str):
        raise ConfigError(f"{key}: {message}", self._lines.get(key), self._source)

    def validate(self) -> None:
        for key in ("kappa", "delta", "J0", "z_step", "bound", "lindblad_step"):
            v = getattr(self, key)
            if not (math.isfinite(v) and v > 0):
                self._fail(key, f"must be positive and finite, got {v}")
        M = self.num_levels
        if M < 3 or M % 2 == 0:
            self._fail("num_levels", f"must be odd and >= 3, got {M}")
        if self.truncation < 2:
            self._fail("truncation", f"must be at least 2, got {self.truncation}")
        if self.chain_table is None and self.truncation > M + 1:
            self._fail("truncation", f"N = {self.truncation} exceeds the chain length "
                                     f"M + 1 = {M + 1}")
        if self.gamma_target is not None and not (
                math.isfinite(self.gamma_target) and self.gamma_target >= 0):
            self._fail("gamma_target", f"must be non-negative, got {self.gamma_target}")
        if self.z_start < 0:
            self._fail("z_start", f"must be non-negative, got {self.z_start}")
        if not self.z_end > self.z_start:
            self._fail("z_end", f"must exceed z_start = {self.z_start}, got {self.z_end}")
        n = (self.z_end - self.z_start) / self.z_step
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            self._fail("z_step", f"{self.z_step} does not divide the range "
                                 f"[{self.z_start}, {self.z_end}]")
        if round(n) < 2:
            self._fail("z_step", "the z grid needs at least three points")
        if self.scenario == "decay":
            if self.gamma_target == 0:
                self._fail("gamma_target", "decay needs a bath; gamma_target = 0 removes it")
            lo, hi = self.fit_window
            if not lo < hi:
                self._fail("fit_window", f"empty window {self.fit_window}")
            if lo < self.z_start or hi > self.z_end:
                self._fail("fit_window", f"window {self.fit_window} lies outside the z range "
                                         f"[{self.z_start}, {self.z_end}]")
            if self.input_site != 0:
                self._fail("input_site", "the decay run excites the anchor (site 0)")
        if self.scenario in ("two-photon", "lindblad-compare"):
            if len(self.photons) != 2 or sum(self.photons) != 2 or min(self.photons) < 0:
                self._fail("photons", f"need two photons on the two coupler modes, "
                                      f"got {self.photons}")
        if self.scenario == "lindblad-compare":
            r = self.z_step / self.lindblad_step
            if abs(r - round(r)) > 1e-9 * r:
                self._fail("lindblad_step", f"must divide z_step = {self.z_step}")
            if self.z_start != 0:
                self._fail("z_start", "the Lindblad run starts from a pure state at z = 0")
        if self.chain_table is not None and not Path(self.chain_table).is_file():
            self._fail("chain_table", f"no such file {self.chain_table!r}")

    # --- derived quantities ------------------------------------------------

    @property
    def has_bath(self) -> bool:
        return self.gamma_target != 0

    def star(self) -> StarBathSpec:
        kappa = self.kappa
        if self.gamma_target:
            kappa = math.sqrt(self.gamma_target * self.delta / math.pi)
        return StarBathSpec(kappa, self.delta, self.num_levels)

    def gamma(self) -> float:
        """Amplitude loss rate used on the non-Hermitian side of every comparison."""
        return self.star().gamma_ww if self.has_bath else 0.0

    def z_grid(self) -> np.ndarray:
        n = int(round((self.z_end - self.z_start) / self.z_step))
        return np.linspace(self.z_start, self.z_end, n + 1)

    def metadata(self) -> dict:
        meta = {"scenario": self.scenario}
        meta.update((k, _emit(v)) for k, v in self.items() if k != "out")
        return meta


def _parse_optional_float(s: str):
    return None if s.lower() in ("", "none") else float(s)


def _parse_int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _parse_pair(kind):
    def parse(s: str) -> tuple:
        parts = [p for p in re.split(r"[,\s]+", s.strip("()[] ")) if p]
        if len(parts) != 2:
            raise ValueError(f"expected two comma-separated values, got {s!r}")
        return tuple(kind(p) for p in parts)
    return parse


def _parse_path(s: str):
    return None if s.lower() in ("", "none") else s


_PARSERS = {
    "kappa": float, "delta": float, "num_levels": _parse_int, "truncation": _parse_int,
    "J0": float, "gamma_target": _parse_optional_float, "z_start": float, "z_end": float,
    "z_step": float, "input_site": _parse_int, "photons": _parse_pair(_parse_int),
    "fit_window": _parse_pair(float), "bound": float, "lindblad_step": float,
    "chain_table": _parse_path, "out": _parse_path,
}


def _emit(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(_emit(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _key_lines(text: str) -> dict:
    """Map (section, key) and (section, None) to 1-based line numbers."""
    out, section = {}, None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            out.setdefault((section, None), i)
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None:
            out.setdefault((section, m.group(1)), i)
    return out


def load_config(path, scenario: str | None = None) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return ScenarioConfig.from_ini(text, scenario, source=str(path))


# --- runs --------------------------------------------------------------------

@dataclass
class RunResult:
    """Output table text, summary lines for stdout and any warnings."""

    table: str
    report: dict
    warnings: list = field(default_factory=list)
    bound_failed: bool = False

    def write(self, path) -> None:
        Path(path).write_text(self.table)

    def summary(self) -> str:
        return "\n".join(f"{k} = {v}" for k, v in self.report.items())


def _chain(cfg: ScenarioConfig):
    if cfg.chain_table is not None:
        chain = tables.read_chain(cfg.chain_table)
        if cfg.truncation > len(chain):
            raise ConfigError(f"truncation: N = {cfg.truncation} exceeds the "
                              f"{len(chain)}-site chain table", cfg._lines.get("truncation"),
                              cfg._source)
        return chain.truncate(cfg.truncation)
    return synthesize_bath(cfg.star(), cfg.truncation)


def _check_lmax(cfg: ScenarioConfig, chain, override: bool, warnings: list) -> float:
    L = max_safe_length(chain, cfg.truncation)
    if cfg.z_end > L:
        msg = (f"z_end = {cfg.z_end} cm exceeds L_max = {L:.3f} cm for the "
               f"{cfg.truncation}-site chain; light reflected from the chain end would "
               f"return to the subsystem")
        if not override:
            raise ConfigError(msg + " (pass --override-lmax to run anyway)",
                              cfg._lines.get("z_end"), cfg._source)
        warnings.append(msg)
    return L


def _subsystem(cfg: ScenarioConfig, override: bool, warnings: list):
    """Coupler network (with bath on site B if lossy) and its L_max."""
    coupler = build_coupler(cfg.J0)
    if not cfg.has_bath:
        return coupler, math.inf
    chain = _chain(cfg)
    L = _check_lmax(cfg, chain, override, warnings)
    try:
        net = attach_chain_bath(coupler, 1, chain)
    except ValueError as exc:
        raise ConfigError(str(exc), cfg._lines.get("chain_table"), cfg._source) from None
    return net, L


def _length(z, y):
    try:
        return f"{first_peak(z, y)[0]:.4f}"
    except ValueError:
        return "none in range"


def run_synth_bath(cfg: ScenarioConfig, override_lmax: bool = False) -> RunResult:
    chain = synthesize_bath(cfg.star(), cfg.truncation)
    L = max_safe_length(chain, cfg.truncation)
    star = cfg.star()
    meta = cfg.metadata()
    meta["L_max[cm]"] = tables.fmt(L)
    report = {
        "sites": len(chain),
        "gamma_ww[cm^-1]": tables.fmt(star.gamma_ww),
        "max|eps|[cm^-1]": tables.fmt(float(np.abs(chain.eps).max())),
        "J_max[cm^-1]": tables.fmt(float(chain.J.max())),
        "L_max[cm]": tables.fmt(L),
    }
    return RunResult(tables.format_chain(chain, meta), report)


def run_decay(cfg: ScenarioConfig, override_lmax: bool = False) -> RunResult:
    warnings = []
    chain = _chain(cfg)
    L = _check_lmax(cfg, chain, override_lmax, warnings)
    lo, hi = cfg.fit_window
    if lo < ZENO_EDGE:
        warnings.append(f"fit window starts at z = {lo} cm, inside the Zeno region "
                        f"(z < {ZENO_EDGE} cm) where decay is still quadratic; "
                        f"the fitted rate is biased")
    z = cfg.z_grid()
    trace = site_intensities(chain, 0, z)
    fit = fit_decay(trace, 0, cfg.fit_window)
    anchor = trace.site(0)
    data = np.column_stack([z, anchor, 1.0 - anchor])
    meta = cfg.metadata()
    meta["L_max[cm]"] = tables.fmt(L)
    report = {
        "gamma_fit[cm^-1]": tables.fmt(fit.gamma_fit),
        "gamma_ww[cm^-1]": tables.fmt(cfg.star().gamma_ww),
        "fit_window[cm]": f"{lo}, {hi}",
        "rms_residual": tables.fmt(fit.rms_residual),
        "L_max[cm]": tables.fmt(L),
    }
    table = tables.format_table(["z[cm]", "I_anchor", "I_bath"], data, meta)
    return RunResult(table, report, warnings)


def run_dimer(cfg: ScenarioConfig, override_lmax: bool = False) -> RunResult:
    warnings = []
    net, L = _subsystem(cfg, override_lmax, warnings)
    z = cfg.z_grid()
    prop = Propagator(net)
    cols, data = ["z[cm]"], [z]
    report = {}
    for name, site in (("A", 0), ("B", 1)):
        tr = site_intensities(prop, site, z)
        raw = tr.intensities[:, :2]
        norm = tr.normalized((0, 1))
        cols += [f"I_A|{name}", f"I_B|{name}", f"In_A|{name}", f"In_B|{name}"]
        data += [raw[:, 0], raw[:, 1], norm[:, 0], norm[:, 1]]
        other = 1 - site
        report[f"transfer_length_{name}[cm]"] = _length(z, norm[:, other])
    herm = site_intensities(build_coupler(cfg.J0), 0, z)
    cols += ["I_A|herm", "I_B|herm"]
    data += [herm.site(0), herm.site(1)]
    report["transfer_length_herm[cm]"] = _length(z, herm.site(1))
    if cfg.has_bath:
        g = dimer_propagators(DimerSpec(cfg.J0, cfg.gamma()), z)
        for name, site in (("A", 0), ("B", 1)):
            p = np.abs(g[:, :, site]) ** 2
            report[f"closed_form_length_{name}[cm]"] = _length(z, p[:, 1 - site] / p.sum(axis=1))
        report["L_max[cm]"] = tables.fmt(L)
    meta = cfg.metadata()
    return RunResult(tables.format_table(cols, np.column_stack(data), meta), report, warnings)


def run_two_photon(cfg: ScenarioConfig, override_lmax: bool = False) -> RunResult:
    warnings = []
    net, L = _subsystem(cfg, override_lmax, warnings)
    z = cfg.z_grid()
    trace = two_photon_trace(net, (0, 1), PhotonConfig(cfg.photons), z)
    z_star, s_star = peak_of(z, trace.entropy)
    i = int(np.argmin(np.abs(z - z_star)))
    report = {
        "input": PhotonConfig(cfg.photons).label(),
        "peak_z[cm]": f"{z_star:.4f}",
        "peak_entropy[nats]": f"{s_star:.6f}",
        "P20,P11,P02@peak": ", ".join(f"{p:.4f}" for p in trace.probabilities[i]),
        "success_prob@peak": f"{trace.success_prob[i]:.6f}",
    }
    return RunResult(trace.to_text(cfg.metadata()), report, warnings)


def run_lindblad_compare(cfg: ScenarioConfig, override_lmax: bool = False) -> RunResult:
    warnings = []
    net, L = _subsystem(cfg, override_lmax, warnings)
    z = cfg.z_grid()
    inp = PhotonConfig(cfg.photons)
    bath = two_photon_trace(net, (0, 1), inp, z).probabilities

    gen = build_generators(DimerSpec(cfg.J0, cfg.gamma()))
    every = int(round(cfg.z_step / cfg.lindblad_step))
    rho0 = FockDensityMatrix.pure(gen.basis, cfg.photons)
    traj = integrate(rho0, gen, cfg.z_end, step=cfg.lindblad_step, record_every=every)
    lind = traj.sector_populations(2)
    if len(lind) != len(z):
        raise RuntimeError(f"Lindblad grid has {len(lind)} points, expected {len(z)}")

    diff = lind - bath
    worst = float(np.abs(diff).max())
    labels = ("P20", "P11", "P02")
    cols = (["z[cm]"] + [f"bath:{p}" for p in labels] + [f"lindblad:{p}" for p in labels]
            + [f"diff:{p}" for p in labels])
    meta = cfg.metadata()
    table = tables.format_table(cols, np.column_stack([z, bath, lind, diff]), meta)
    failed = worst > cfg.bound
    report = {
        "input": inp.label(),
        "gamma[cm^-1]": tables.fmt(cfg.gamma()),
        "max_discrepancy": tables.fmt(worst),
        "at_z[cm]": f"{z[int(np.abs(diff).max(axis=1).argmax())]:.4f}",
        "bound": tables.fmt(cfg.bound),
        "status": "FAIL" if failed else "ok",
    }
    return RunResult(table, report, warnings, bound_failed=failed)


RUNNERS = {
    "synth-bath": run_synth_bath,
    "decay": run_decay,
    "dimer": run_dimer,
    "two-photon": run_two_photon,
    "lindblad-compare": run_lindblad_compare,
}


def run(cfg: ScenarioConfig, override_lmax: bool = False) -> RunResult:
    return RUNNERS[cfg.scenario](cfg, override_lmax)
