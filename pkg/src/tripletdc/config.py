"""Declarative run configuration, seeds, manifests and atomic file output.

Config files are TOML with the following key tree (every key optional; shown
with its default). CLI --set overrides use dotted paths, e.g.
--set system.epsilon_b=120.

    [system]
    kappa = 0.001          # triplet coupling rate
    gamma_a = 1.0          # signal damping (sets the time unit)
    gamma_b = 2.0          # pump damping
    epsilon_b = 200.0      # pump drive amplitude (epsilon_b_im for a phase)

    [drive]
    epsilon_a = 0.0        # injected signal amplitude (epsilon_a_im likewise)
    # t_off = 15.0         # switch the injected signal off at this time

    [initial]              # coherent initial point for trajectories
    alpha_re = 0.0
    alpha_im = 0.0
    beta_re = 0.0
    beta_im = 0.0

    [ensemble]
    n_traj = 100000
    t_final = 30.0
    dt = 0.001
    sample_stride = 50
    batch_size = 256
    # master_seed = 1234   # omitted: derived from the config hash
    # divergence_bound = 1e6
    # backend = "numba"    # or "numpy"

    [spectrum]
    omega_max = 20.0
    n_linear = 300
    n_log = 100
    b_lo_flip = true
    check_validity = false # run a fluctuation ensemble to set the valid column
    check_n_traj = 500
    check_t_final = 30.0

    [scan]
    parameter = "epsilon_b"   # epsilon_b | epsilon_a | initial_alpha
    values = [100.0, 104.0, 108.0]
    # or: start = 95.0, stop = 115.0, num = 6

    [mcwf]
    cutoff_a = 40
    cutoff_b = 20
    dt = 5e-4
    t_final = 6.0
    n_traj = 200
    sample_stride = 100
    jump_rate_factor = 2.0
    z_threshold = 3.0

    [kappa]
    chi3 = 1.5e-20
    omega_a = 1.2189380490432093e15   # 2 pi * 194 THz
    eps_rel_a = 4.0
    eps_rel_b = 4.0
    length = 1.2566370614359172e-4    # 2 pi * 20 um circumference
    m_a = 54
    m_b = 162
    sigma = 4.3e11                    # 1/m^2; or w_a/w_b, or profile_a/profile_b
    gamma_a_ref = 1.5e9

    [output]
    dir = "."
    prefix = "run"
    semiclassical_trace = false

Manifests are JSON written next to every data file: the fully resolved config
(re-parseable into the same run), the master seed actually used, the package
version, wall time, divergence counts and sha256 checksums of the outputs.
All file writes go through a temp file and os.replace, so readers never see a
partial file.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
import sys
import tempfile

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from tripletdc.ensemble import EnsembleConfig, PhaseSpacePoint
from tripletdc.exceptions import ConfigurationError
from tripletdc.mcwf import FockConfig
from tripletdc.nonlinearity import MaterialGeometry
from tripletdc.semiclassical import DriveSchedule, SystemParams

DEFAULTS = {
    "system": {"kappa": 0.001, "gamma_a": 1.0, "gamma_b": 2.0,
               "epsilon_b": 200.0, "epsilon_b_im": 0.0},
    "drive": {"epsilon_a": 0.0, "epsilon_a_im": 0.0},
    "initial": {"alpha_re": 0.0, "alpha_im": 0.0, "beta_re": 0.0, "beta_im": 0.0},
    "ensemble": {"n_traj": 100_000, "t_final": 30.0, "dt": 1e-3,
                 "sample_stride": 50, "batch_size": 256},
    "spectrum": {"omega_max": 20.0, "n_linear": 300, "n_log": 100,
                 "b_lo_flip": True, "check_validity": False,
                 "check_n_traj": 500, "check_t_final": 30.0},
    "scan": {"parameter": "epsilon_b"},
    "mcwf": {"cutoff_a": 40, "cutoff_b": 20, "dt": 5e-4, "t_final": 6.0,
             "n_traj": 200, "sample_stride": 100, "jump_rate_factor": 2.0,
             "z_threshold": 3.0},
    "kappa": {"chi3": 1.5e-20, "omega_a": 2.0 * math.pi * 194e12,
              "eps_rel_a": 4.0, "eps_rel_b": 4.0,
              "length": 2.0 * math.pi * 20e-6, "m_a": 54, "m_b": 162,
              "sigma": 0.43e12, "gamma_a_ref": 1.5e9},
    "output": {"dir": ".", "prefix": "run", "semiclassical_trace": False},
}

SCAN_PARAMETERS = ("epsilon_b", "epsilon_a", "initial_alpha")


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path: str | None = None) -> dict:
    """Defaults merged with an optional TOML file; unknown keys rejected."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is None:
        return cfg
    try:
        with open(path, "rb") as f:
            user = tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"cannot parse config {path}: {exc}") from exc
    for section in user:
        if section not in DEFAULTS:
            raise ConfigurationError(f"unknown config section [{section}]")
        if not isinstance(user[section], dict):
            raise ConfigurationError(f"[{section}] must be a table")
    return _merge(cfg, user)


def apply_overrides(cfg: dict, assignments) -> dict:
    """Apply 'section.key=value' strings; values parse as TOML literals."""
    out = copy.deepcopy(cfg)
    for item in assignments or []:
        if "=" not in item:
            raise ConfigurationError(f"override must look like section.key=value: {item!r}")
        path, raw = item.split("=", 1)
        keys = path.strip().split(".")
        if len(keys) != 2:
            raise ConfigurationError(f"override path must be section.key: {path!r}")
        section, key = keys[0].strip(), keys[1].strip()
        if section not in DEFAULTS:
            raise ConfigurationError(f"unknown config section [{section}]")
        try:
            value = tomllib.loads(f"v = {raw.strip()}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw.strip()
        out.setdefault(section, {})[key] = value
    return out


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def resolve_seed(cfg: dict) -> int:
    """Explicit [ensemble].master_seed, else the first 8 bytes of the config hash."""
    seed = cfg.get("ensemble", {}).get("master_seed")
    if seed is not None:
        return int(seed) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(canonical_json(cfg).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def system_params(cfg: dict) -> SystemParams:
    s = cfg["system"]
    return SystemParams(kappa=float(s["kappa"]), gamma_a=float(s["gamma_a"]),
                        gamma_b=float(s["gamma_b"]),
                        epsilon_b=complex(float(s["epsilon_b"]),
                                          float(s.get("epsilon_b_im", 0.0))))


def drive_schedule(cfg: dict) -> DriveSchedule:
    d = cfg["drive"]
    t_off = d.get("t_off")
    return DriveSchedule(epsilon_a=complex(float(d["epsilon_a"]),
                                           float(d.get("epsilon_a_im", 0.0))),
                         t_off=None if t_off is None else float(t_off))


def initial_point(cfg: dict) -> PhaseSpacePoint:
    i = cfg["initial"]
    return PhaseSpacePoint.coherent(
        complex(float(i["alpha_re"]), float(i["alpha_im"])),
        complex(float(i["beta_re"]), float(i["beta_im"])))


def ensemble_config(cfg: dict, seed: int) -> EnsembleConfig:
    e = cfg["ensemble"]
    bound = e.get("divergence_bound")
    return EnsembleConfig(
        n_traj=int(e["n_traj"]), t_final=float(e["t_final"]), dt=float(e["dt"]),
        sample_stride=int(e["sample_stride"]), master_seed=seed,
        divergence_bound=None if bound is None else float(bound),
        batch_size=int(e["batch_size"]), backend=e.get("backend"))


def fock_config(cfg: dict, seed: int) -> FockConfig:
    m = cfg["mcwf"]
    return FockConfig(cutoff_a=int(m["cutoff_a"]), cutoff_b=int(m["cutoff_b"]),
                      dt=float(m["dt"]), t_final=float(m["t_final"]),
                      n_traj=int(m["n_traj"]), sample_stride=int(m["sample_stride"]),
                      master_seed=seed, jump_rate_factor=float(m["jump_rate_factor"]))


def material_geometry(cfg: dict) -> MaterialGeometry:
    k = cfg["kappa"]
    return MaterialGeometry(chi3=float(k["chi3"]), omega_a=float(k["omega_a"]),
                            eps_rel_a=float(k["eps_rel_a"]),
                            eps_rel_b=float(k["eps_rel_b"]),
                            length=float(k["length"]),
                            m_a=int(k["m_a"]), m_b=int(k["m_b"]))


def scan_values(cfg: dict) -> tuple[str, list[float]]:
    s = cfg.get("scan", {})
    name = s.get("parameter", "epsilon_b")
    if name not in SCAN_PARAMETERS:
        raise ConfigurationError(
            f"scan parameter must be one of {SCAN_PARAMETERS}, got {name!r}")
    if "values" in s:
        values = [float(v) for v in s["values"]]
    elif {"start", "stop", "num"} <= set(s):
        values = list(np.linspace(float(s["start"]), float(s["stop"]), int(s["num"])))
    else:
        raise ConfigurationError("[scan] needs either values or start/stop/num")
    if not values:
        raise ConfigurationError("[scan] values is empty")
    return name, values


# ---------------------------------------------------------------- file output

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=False)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(text.encode())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header, rows) -> None:
    """Fixed column order, shortest round-trip floats, LF line endings."""
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ConfigurationError(
                f"row width {len(row)} does not match header width {len(header)}")
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(data_path: str, cfg: dict, seed: int, wall_time_s: float,
                   extra: dict | None = None) -> str:
    """JSON manifest next to data_path, checksumming it; returns manifest path."""
    from tripletdc import __version__
    manifest = {
        "config": cfg,
        "master_seed": int(seed),
        "code_version": __version__,
        "wall_time_s": float(wall_time_s),
        "outputs": {os.path.basename(data_path): sha256_file(data_path)},
    }
    if extra:
        manifest.update(extra)
    path = os.path.splitext(data_path)[0] + ".manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
