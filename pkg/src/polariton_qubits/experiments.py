"""Named experiments: validated config in, summary and tables out."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import lattice_dynamics as ld
from . import qnd_readout as qr
from . import single_qubit_gate as sq
from . import trap_solver as ts
from . import two_qubit_gate as tq
from .config import ExperimentConfig
from .errors import ConfigurationError


@dataclass
class Result:
    """``summary`` is a flat key → value mapping; ``tables`` maps a name to
    ``(header, rows)``."""

    summary: dict
    tables: dict = field(default_factory=dict)


def run_trapspec(cfg: ExperimentConfig) -> Result:
    t = cfg.section("trap")
    grid = ts.build_coupled_well_potential(t["R"], t["D"], t["depth"], dx=t["dx"],
                                           padding=t["padding"], m_eff=t["m_eff"])
    sol = ts.solve_eigenmodes(grid, k=t["levels"])
    summary = {
        "R_um": t["R"], "D_um": t["D"], "depth_meV": t["depth"],
        "U": ts.tunnel_coupling(sol),
        "mode_area_um2": ts.mode_area(sol.wavefunctions[0], grid.dx, grid.dy),
        "residual": sol.residual,
    }
    rows = [(k, float(e)) for k, e in enumerate(sol.energies)]
    return Result(summary, {"levels": (["level", "energy_meV"], rows)})


def run_lattice(cfg: ExperimentConfig) -> Result:
    p, n = cfg.section("lattice"), cfg.section("numerics")
    lat = ld.square_lattice(p["nx"], p["ny"], p["U"], p["delta"], p["gamma"], p["gamma_t"])
    target = (p["ny"] // 2) * p["nx"] + p["nx"] // 2
    pulse = ld.flat_top_pulse(p["F_T"], p["tau"], p["tau_r"])
    pumps = ld.cancellation_pumps(lat, target, pulse, compensate=p["compensate"])
    traj = ld.integrate_lattice(lat, pumps, (p["t_start"], p["t_stop"]), n["dt"],
                                store_every=n["store_every"])
    window = (p["window_start"], p["window_stop"])
    pops = traj.populations
    sel = (traj.times >= window[0]) & (traj.times <= window[1])
    single = ld.TrapLattice((p["delta"],), (), p["gamma"], p["gamma_t"])
    closed = float(np.abs(ld.steady_state(single, [p["F_T"]])[0]) ** 2)
    summary = {
        "target": target,
        "compensate": p["compensate"],
        "plateau_ratio": ld.plateau_ratio(traj, target, window),
        "target_population": float(pops[sel, target].mean()),
        "single_trap_closed_form": closed,
        "density_parameter": ld.DensityGuard().value(traj),
    }
    header = ["t_ps", "trap", "re_alpha", "im_alpha", "population"]
    return Result(summary, {"trajectory": (header, list(traj.csv_rows()))})


def _gate_params(g: dict) -> tq.GateParams:
    return tq.gate_params(g["delta"], V_ex=g["V_ex"], U=g["U"], g=g["g"], gamma=g["gamma"],
                          gamma_t=g["gamma_t"], Q=g["Q"], trion_offset=g["trion_offset"])


def run_gate2q(cfg: ExperimentConfig) -> Result:
    g, n = cfg.section("gate"), cfg.section("numerics")
    params = _gate_params(g)
    P0 = tq.peak_flux_amplitude(g["power"], g["wavelength"])
    settings = tq.SearchSettings(tau_min=n["tau_min"], tau_max=n["tau_max"],
                                 coarse_dt=n["coarse_dt"], dt=n["dt"], window=n["window"],
                                 tol=n["tol"])
    res = tq.search_pulse(params, P0, g["strategy"],
                          delta2=g["delta2"] if g["strategy"] == "geometric_two_pulse" else None,
                          settings=settings)
    summary = {
        "strategy": g["strategy"], "Q": g["Q"], "P0": P0,
        "Theta": res.theta, "Theta_g": res.theta_g, "Theta_d": res.theta_d,
        "Theta_aa": res.theta_aa, "F": res.fidelity, "gate_time_ns": res.gate_time,
        "C0": tq.purcell_cooperativity(g["Q"], g["mode_volume"], g["wavelength"]),
    }
    D = np.asarray(res.decoherence)
    for i, j in zip(*np.triu_indices(4, 1)):
        summary[f"D{i}{j}"] = float(D[i, j])
    header = ["delta_meV", "P0", "tau_ps", "theta", "theta_g", "theta_d", "theta_aa",
              "min_cos_theta", "peak_population"]
    rows = [tuple(getattr(p, "delta" if h == "delta_meV" else h.replace("_ps", ""))
                  for h in header) for p in res.pulses]
    return Result(summary, {"pulses": (header, rows)})


def rotation_spec(r: dict) -> sq.RotationSpec:
    return sq.RotationSpec(E_z=r["E_z"], V_ex=r["V_ex"] * 1e-3, N_target=r["N_target"],
                           pulse=ld.flat_top_pulse(0.0, r["tau"], r["tau_r"]),
                           gamma=r["gamma"], gamma_t=r["gamma_t"], delta=r["delta"],
                           g_factor=r["g_factor"], extra_dephasing=r["extra_dephasing"])


def run_gate1q(cfg: ExperimentConfig) -> Result:
    r, n = cfg.section("rotation"), cfg.section("numerics")
    spec = rotation_spec(r)
    res = sq.pi_rotation(spec, dt=n["dt"], t_pi=r["t_pi"], store_every=n["store_every"])
    summary = res.as_dict()
    summary["F0"] = spec.resonant_pulse().F0
    header = ["t_ps", "p_up", "p_down", "sx", "sy", "sz"]
    return Result(summary, {"trajectory": (header, list(res.trajectory.csv_rows()))})


def readout_from(r: dict, n: dict) -> qr.ReadoutConfig:
    return qr.readout_config(
        r["sidedness"], r["delta"], V_ex=r["V_ex"], anisotropic=r["anisotropic"],
        rabi_splitting=r["rabi_splitting"], gamma=r["gamma"], V=r["V"], V_s=r["V_s"],
        F_T=r["F_T"], eta=r["eta"], measurement=r["measurement"], U=r["U"], ramp=r["ramp"],
        model_constant=r["model_constant"], tau_start=n["tau_start"],
        tau_ratio=n["tau_ratio"], tau_cap=n["tau_cap"], dt=n["dt"])


def run_qnd(cfg: ExperimentConfig) -> Result:
    r, n = cfg.section("readout"), cfg.section("numerics")
    b = qr.readout_budget(readout_from(r, n), r["target_P_e"])
    summary = {
        "sidedness": b.sidedness, "measurement": b.measurement, "delta": b.delta, "V_s": b.V_s,
        "theta_plus_up": b.theta_plus[0], "theta_plus_down": b.theta_plus[1],
        "theta_minus_up": b.theta_minus[0], "theta_minus_down": b.theta_minus[1],
        "tilt": b.tilt, "baseline": b.baseline, "tau_meas": b.tau_meas, "N_mean": b.N_mean,
        "P_sn": b.P_sn, "P_crosstalk": b.P_crosstalk, "P_pinning": b.P_pinning,
        "model_constant": b.model_constant,
    }
    header = ["sidedness", "delta_meV", "measurement", "tau_meas_ps", "N_mean", "P_sn",
              "P_crosstalk", "P_pinning", "model_constant"]
    row = (b.sidedness, b.delta, b.measurement, b.tau_meas, b.N_mean, b.P_sn,
           b.P_crosstalk, b.P_pinning, b.model_constant)
    return Result(summary, {"budget": (header, [row])})


RUNNERS = {
    "trapspec": run_trapspec, "lattice": run_lattice, "gate2q": run_gate2q,
    "gate1q": run_gate1q, "qnd": run_qnd,
}


def _sweep_point(args) -> dict:
    cfg, point = args
    values = {s: dict(v) for s, v in cfg.values.items()}
    for (sec, key), val in point:
        values[sec][key] = val
    sub = replace(cfg, experiment=cfg.sweep_target, values=values, ranges={})
    return RUNNERS[cfg.sweep_target](sub).summary


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> Result:
    """Cartesian product of the ranged keys, rows in lexicographic order."""
    keys = sorted(cfg.ranges)
    axes = [sorted(cfg.ranges[k]) for k in keys]
    points = [tuple(zip(keys, combo)) for combo in itertools.product(*axes)]
    if points and any(len(a) == 0 for a in axes):
        points = []
    header = [f"{s}.{k}" for s, k in keys] + list(cfg.metrics)
    if not points:
        return Result({"points": 0}, {"sweep": (header, [])})
    tasks = [(cfg, p) for p in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_sweep_point, tasks))
    else:
        summaries = [_sweep_point(t) for t in tasks]
    rows = []
    for p, s in zip(points, summaries):
        missing = [m for m in cfg.metrics if m not in s]
        if missing:
            raise ConfigurationError(f"unknown sweep metric {missing[0]!r}; available: {sorted(s)}",
                                     key="sweep.metrics")
        rows.append(tuple(v for _, v in p) + tuple(s[m] for m in cfg.metrics))
    return Result({"points": len(rows)}, {"sweep": (header, rows)})


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> Result:
    if cfg.experiment == "sweep":
        return run_sweep(cfg, jobs)
    if cfg.experiment not in RUNNERS:
        raise ConfigurationError(f"experiment {cfg.experiment!r} has no runner", key="experiment.name")
    return RUNNERS[cfg.experiment](cfg)
