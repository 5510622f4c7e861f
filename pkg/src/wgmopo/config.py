"""Run configuration for the command-line front end.

Configurations are INI files. Every physical quantity carries its unit in
the key name (``R_mm``, ``T_min_C``, ``lambda_nm``). Values are resolved in
the order built-in defaults, config file, ``WGMOPO_<SECTION>_<KEY>``
environment variables, command-line flags.
"""
from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import asdict, dataclass, field
from importlib import resources

from .errors import ConfigError
from .phasematch import Channel

ENV_PREFIX = "WGMOPO_"

DEFAULTS = """
[material]
path =

[resonator]
R_mm = 2.5
rho_mm = 0.58
h_mm = 0.5
T_ref_C = 25

[pump]
lambda_nm = 532.0

[scan]
T_min_C = 100
T_max_C = 140
T_step_C = 0.5
window_K = 0.25
# T_min_C/T_max_C given as calibrated (experimental) or raw (model) temperatures
temperature_scale = calibrated
# q_s, q_i, p_s, p_i per channel; q_p = 1, p_p = 0
channels = 1,1,0,0; 3,3,0,0

[spectrum]
T_C = 100
q_max = 3
p_max = 2
pol = TE
span_fsr = 1.0

[map]
mode = radius
R_mm = 0.3, 0.44, 0.6, 1.0, 1.5, 2.5
lambda_nm = 515, 518, 521, 524, 527, 532
T_min_C = 20
T_max_C = 250
T_step_C = 5

[triplet]
target = Cs_D1
channel = 1,1,0,0

[opo]
P0_uW = 5
P_min_uW = 0.1
P_max_uW = 50
n_points = 60
delta_p = 0
mismatch_MHz = 0
gamma_s_MHz = 6.6
gamma_i_MHz = 6.6
kappa_p = 0.5
kappa_s = 0.5
kappa_i = 0.5

[tune]
mechanism = substrate
mechanism_path =
fringe_factor = 1.0
U_min_V = -200
U_max_V = 200
targets_MHz = -200, -100, 0, 100, 200

[targets]
# extra lines as  name = vacuum wavelength in nm

[output]
dir = out
format = csv
threads = 1
seed = 0
"""

_SCHEMA = configparser.ConfigParser(interpolation=None)
_SCHEMA.optionxform = str
_SCHEMA.read_string(DEFAULTS)


@dataclass(frozen=True)
class GeometryConfig:
    R_mm: float
    rho_mm: float
    h_mm: float
    T_ref_C: float


@dataclass(frozen=True)
class ScanConfig:
    T_min_C: float
    T_max_C: float
    T_step_C: float
    window_K: float
    channels: tuple
    temperature_scale: str = "calibrated"


@dataclass(frozen=True)
class SpectrumConfig:
    T_C: float
    q_max: int
    p_max: int
    pol: str
    span_fsr: float


@dataclass(frozen=True)
class MapConfig:
    mode: str
    R_mm: tuple
    lambda_nm: tuple
    T_min_C: float
    T_max_C: float
    T_step_C: float


@dataclass(frozen=True)
class OPOConfig:
    P0_uW: float
    P_min_uW: float
    P_max_uW: float
    n_points: int
    delta_p: float
    mismatch_MHz: float
    gamma_s_MHz: float
    gamma_i_MHz: float
    kappa_p: float
    kappa_s: float
    kappa_i: float


@dataclass(frozen=True)
class TuneConfig:
    mechanism: str
    mechanism_path: str
    fringe_factor: float
    U_min_V: float
    U_max_V: float
    targets_MHz: tuple


@dataclass(frozen=True)
class RunConfig:
    material_path: str | None
    geometry: GeometryConfig
    lambda_p_nm: float
    scan: ScanConfig
    spectrum: SpectrumConfig
    map: MapConfig
    triplet_target: str
    triplet_channel: Channel
    opo: OPOConfig
    tune: TuneConfig
    targets: dict
    out_dir: str
    format: str
    threads: int
    seed: int
    sha256: str = field(default="", compare=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("sha256")
        return d


def _floats(text, key):
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected a comma-separated list of numbers, got {text!r}") from None


def _channels(text, key):
    out = []
    for part in text.split(";"):
        if not part.strip():
            continue
        nums = part.split(",")
        try:
            q_s, q_i, p_s, p_i = (int(x) for x in nums)
        except ValueError:
            raise ConfigError(f"{key}: channel {part.strip()!r} must be four integers q_s,q_i,p_s,p_i") from None
        try:
            out.append(Channel(q_s, q_i, p_s, p_i).validate())
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    return tuple(out)


def _typed(cp, section, key, kind):
    raw = cp[section][key].strip()
    name = f"[{section}] {key}"
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            return int(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected {kind.__name__}, got {raw!r}") from None
    return raw


def _apply_env(cp, environ):
    for var, value in environ.items():
        if not var.startswith(ENV_PREFIX):
            continue
        rest = var[len(ENV_PREFIX):]
        for section in cp.sections():
            head = section.upper() + "_"
            if not rest.upper().startswith(head):
                continue
            wanted = rest[len(head):].upper()
            for key in cp[section]:
                if key.upper() == wanted:
                    cp[section][key] = value


def load_config(path=None, environ=None, overrides=None):
    """Resolve a :class:`RunConfig`.

    Parameters
    ----------
    path : str or Path, optional
        INI file layered over the defaults.
    environ : mapping, optional
        Environment to scan for ``WGMOPO_`` overrides; defaults to ``os.environ``.
    overrides : dict, optional
        ``{(section, key): value}`` applied last, e.g. from command-line flags.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    cp.read_string(DEFAULTS)
    if path is not None:
        user = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
        user.optionxform = str
        try:
            with open(path) as fh:
                user.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        for section in user.sections():
            if not cp.has_section(section):
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in user[section].items():
                if section != "targets" and key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                cp[section][key] = value
    _apply_env(cp, os.environ if environ is None else environ)
    for (section, key), value in (overrides or {}).items():
        if value is not None:
            cp[section][key] = str(value)
    cfg = _build(cp)
    # where results go and how many workers compute them do not change the results
    skip = {("output", "dir"), ("output", "threads")}
    canon = "\n".join(
        f"[{s}]\n" + "\n".join(f"{k}={cp[s][k].strip()}" for k in sorted(cp[s]) if (s, k) not in skip)
        for s in sorted(cp.sections())
    )
    object.__setattr__(cfg, "sha256", hashlib.sha256(canon.encode()).hexdigest())
    return cfg


def _load_targets(cp):
    tcp = configparser.ConfigParser(interpolation=None)
    tcp.optionxform = str
    tcp.read_string(resources.files("wgmopo.data").joinpath("targets.ini").read_text())
    targets = {k: float(v) * 1e-9 for k, v in tcp["targets"].items()}
    for k, v in cp["targets"].items():
        try:
            targets[k] = float(v) * 1e-9
        except ValueError:
            raise ConfigError(f"[targets] {k}: expected a wavelength in nm, got {v!r}") from None
    return targets


def _build(cp):
    f = lambda s, k: _typed(cp, s, k, float)  # noqa: E731
    i = lambda s, k: _typed(cp, s, k, int)  # noqa: E731
    geometry = GeometryConfig(f("resonator", "R_mm"), f("resonator", "rho_mm"), f("resonator", "h_mm"),
                              f("resonator", "T_ref_C"))
    if geometry.R_mm <= 0 or geometry.rho_mm <= 0 or geometry.h_mm <= 0:
        raise ConfigError("[resonator] R_mm, rho_mm and h_mm must be positive")
    if geometry.rho_mm > geometry.R_mm:
        raise ConfigError("[resonator] rho_mm must not exceed R_mm")
    scan = ScanConfig(f("scan", "T_min_C"), f("scan", "T_max_C"), f("scan", "T_step_C"), f("scan", "window_K"),
                      _channels(cp["scan"]["channels"], "[scan] channels"), cp["scan"]["temperature_scale"].strip())
    if scan.temperature_scale not in ("calibrated", "raw"):
        raise ConfigError(f"[scan] temperature_scale must be calibrated or raw, got {scan.temperature_scale!r}")
    if scan.T_max_C < scan.T_min_C or scan.T_step_C <= 0 or scan.window_K <= 0:
        raise ConfigError("[scan] needs T_min_C <= T_max_C and positive T_step_C, window_K")
    spectrum = SpectrumConfig(f("spectrum", "T_C"), i("spectrum", "q_max"), i("spectrum", "p_max"),
                              cp["spectrum"]["pol"].strip().upper(), f("spectrum", "span_fsr"))
    if spectrum.pol not in ("TE", "TM") or spectrum.q_max < 0 or spectrum.p_max < 0 or spectrum.span_fsr < 0:
        raise ConfigError("[spectrum] needs pol TE|TM and nonnegative q_max, p_max, span_fsr")
    mp = MapConfig(cp["map"]["mode"].strip(), _floats(cp["map"]["R_mm"], "[map] R_mm"),
                   _floats(cp["map"]["lambda_nm"], "[map] lambda_nm"), f("map", "T_min_C"), f("map", "T_max_C"),
                   f("map", "T_step_C"))
    if mp.mode not in ("radius", "wavelength"):
        raise ConfigError(f"[map] mode must be radius or wavelength, got {mp.mode!r}")
    if mp.T_max_C < mp.T_min_C or mp.T_step_C <= 0:
        raise ConfigError("[map] needs T_min_C <= T_max_C and positive T_step_C")
    opo = OPOConfig(*(f("opo", k) if k != "n_points" else i("opo", k) for k in OPOConfig.__dataclass_fields__))
    if opo.P0_uW <= 0 or opo.n_points < 0 or opo.P_max_uW < opo.P_min_uW:
        raise ConfigError("[opo] needs positive P0_uW, n_points >= 0 and P_min_uW <= P_max_uW")
    tune = TuneConfig(cp["tune"]["mechanism"].strip(), cp["tune"]["mechanism_path"].strip(),
                      f("tune", "fringe_factor"), f("tune", "U_min_V"), f("tune", "U_max_V"),
                      _floats(cp["tune"]["targets_MHz"], "[tune] targets_MHz"))
    if tune.mechanism not in ("substrate", "electrooptic", "null"):
        raise ConfigError(f"[tune] mechanism must be substrate, electrooptic or null, got {tune.mechanism!r}")
    channel = _channels(cp["triplet"]["channel"], "[triplet] channel")
    if len(channel) != 1:
        raise ConfigError("[triplet] channel must name exactly one channel")
    fmt = cp["output"]["format"].strip()
    if fmt not in ("csv", "json", "both"):
        raise ConfigError(f"[output] format must be csv, json or both, got {fmt!r}")
    targets = _load_targets(cp)
    target = cp["triplet"]["target"].strip()
    if target not in targets:
        raise ConfigError(f"[triplet] target {target!r} not in target table {sorted(targets)}")
    threads = i("output", "threads")
    if threads < 1:
        raise ConfigError("[output] threads must be >= 1")
    return RunConfig(
        material_path=cp["material"]["path"].strip() or None,
        geometry=geometry,
        lambda_p_nm=f("pump", "lambda_nm"),
        scan=scan,
        spectrum=spectrum,
        map=mp,
        triplet_target=target,
        triplet_channel=channel[0],
        opo=opo,
        tune=tune,
        targets=targets,
        out_dir=cp["output"]["dir"].strip(),
        format=fmt,
        threads=threads,
        seed=i("output", "seed"),
    )
