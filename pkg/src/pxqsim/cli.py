"""Experiment runner.

Each experiment rebuilds one figure-class result as plain data files
(CSV with commented metadata, JSON reports).  Configuration is a flat
``key = value`` INI file with one section per experiment; every output
embeds the exact configuration, its hash, and all seeds, so a run is
reproducible byte for byte from its own header.

    pxqsim --experiment sector-graph --config run.cfg --out results/

Command-line ``--seed``, ``--threads``, and ``--out`` override the
configuration.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io as _io
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, dfs, fermion, io, liouville, noise, perturb, spectral, spinops

__all__ = ["ExperimentConfig", "parse_config", "serialize_config", "config_hash", "main"]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text) -> tuple[int, ...]:
    if isinstance(text, tuple):
        return text
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _pair(text) -> tuple[int, ...]:
    out = _int_list(text)
    if len(out) not in (1, 2):
        raise ValueError(f"expected one or two mode indices, got {text!r}")
    return out


# Experiment schemas: name -> {param: (converter, default)}.
SCHEMAS: dict[str, dict[str, tuple]] = {
    "gksl-evolve": {
        "n_sites": (int, 6), "jumps": (str, "QP"), "J": (float, 1.0),
        "h": (float, 0.0), "V": (float, 0.0), "gamma": (float, 1000.0),
        "rho0": (str, "000111"), "t_final": (float, 10.0), "num_times": (int, 101),
        "spectrum_csv": (_bool, False), "memory_cap_gb": (float, 8.0),
    },
    "noise-check": {
        "n_sites": (int, 2), "jumps": (str, "QP"), "J": (float, 1.0),
        "h": (float, 0.0), "gamma": (float, 20.0), "psi0": (str, "10"),
        "dt": (float, 0.005), "t_final": (float, 1.0),
        "m_list": (_int_list, (1000, 4000)), "seed": (int, 2024),
        "bulk_only": (_bool, False), "memory_cap_gb": (float, 8.0),
    },
    "sector-census": {
        "n_sites": (int, 8), "jumps": (str, "QP"), "J": (float, 1.0),
        "memory_cap_gb": (float, 8.0),
    },
    "sector-graph": {
        "n_sites": (int, 8), "jumps": (str, "QP"), "J": (float, 1.0),
        "start": (str, "00010001"), "memory_cap_gb": (float, 8.0),
    },
    "effective-verify": {
        "n_sites_list": (_int_list, (4, 5, 6)),
        "kinds": (str, "PXQ,PXP,PXQ-QXP"), "J": (float, 1.0),
        "memory_cap_gb": (float, 8.0),
    },
    "fermion-dynamics": {
        "mode": (str, "two_particle_kink"), "n_sites": (int, 40),
        "J": (float, 1.0), "h": (float, 1.5), "initial": (_pair, (16, 25)),
        "t_final": (float, 20.0), "num_times": (int, 81),
        "memory_cap_gb": (float, 8.0),
    },
    "ipr-scan": {
        "n_sites": (int, 40), "J": (float, 1.0), "g": (float, 1.5),
        "h_min": (float, 0.5), "h_max": (float, 4.5), "h_step": (float, 0.5),
        "window": (int, 60), "disorder": (float, 1e-4),
        "seeds": (_int_list, (0, 1, 2)), "memory_cap_gb": (float, 8.0),
    },
    "ipr-scaling": {
        "n_sites_list": (_int_list, (40, 60, 80, 100, 120)), "J": (float, 1.0),
        "g": (float, 1.5), "window": (int, 60), "disorder": (float, 1e-4),
        "seed": (int, 0), "memory_cap_gb": (float, 8.0),
    },
    "heatmap": {
        "n_sites": (int, 50), "J": (float, 1.0), "g": (float, 1.5),
        "h": (float, 3.0), "window": (int, 60), "disorder": (float, 1e-4),
        "seed": (int, 0), "state_offset": (int, 30), "memory_cap_gb": (float, 8.0),
    },
    "perturb-report": {
        "n_sites": (int, 3), "jumps": (str, "QQ"), "J": (float, 1.0),
        "gammas": (_int_list, (100, 1000)), "t": (float, 2.0),
        "initial": (str, "001"), "memory_cap_gb": (float, 8.0),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict

    def __post_init__(self):
        if self.experiment not in SCHEMAS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        schema = SCHEMAS[self.experiment]
        unknown = set(self.params) - set(schema)
        if unknown:
            raise ValueError(f"unknown parameters {sorted(unknown)}")
        merged = {}
        for name, (conv, default) in schema.items():
            raw = self.params.get(name, default)
            merged[name] = conv(raw)
        object.__setattr__(self, "params", merged)

    def __getitem__(self, name):
        return self.params[name]


def _ini_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep parameter-name case (J vs j)
    return parser


def parse_config(text: str, experiment: str) -> ExperimentConfig:
    """Parse the section for one experiment out of an INI document."""
    parser = _ini_parser()
    parser.read_string(text)
    if experiment not in parser:
        raise ValueError(f"config has no [{experiment}] section")
    return ExperimentConfig(experiment, dict(parser[experiment]))


def serialize_config(config: ExperimentConfig) -> str:
    parser = _ini_parser()
    parser[config.experiment] = {
        k: ",".join(str(x) for x in v) if isinstance(v, tuple) else str(v)
        for k, v in sorted(config.params.items())
    }
    out = _io.StringIO()
    parser.write(out)
    return out.getvalue()


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode()).hexdigest()[:12]


def _meta(config: ExperimentConfig, **extra) -> dict:
    meta = {f"config.{k}": v for k, v in config.params.items()}
    meta.update(
        experiment=config.experiment,
        config_hash=config_hash(config),
        package_version=__version__,
    )
    meta.update(extra)
    return meta


class ResourceRefusal(RuntimeError):
    pass


def _check_memory(estimate_bytes: float, cap_gb: float, what: str) -> None:
    cap = cap_gb * 1e9
    if estimate_bytes > cap:
        raise ResourceRefusal(
            f"{what} needs an estimated {estimate_bytes / 1e9:.1f} GB "
            f"(cap {cap_gb:.1f} GB); refusing"
        )


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _run_gksl_evolve(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    n = cfg["n_sites"]
    _check_memory(3 * 16 * (4.0 ** n) * (2 * n + 2), cfg["memory_cap_gb"], "doubled-space evolution")
    spec = spinops.HamiltonianSpec(N=n, J=cfg["J"], h=cfg["h"], V=cfg["V"])
    ham = spinops.build_hamiltonian(spec)
    jumps = spinops.build_jump_set(cfg["jumps"], n)
    liou = liouville.build_liouvillian(ham, jumps, cfg["gamma"])
    s0 = spinops.state_from_string(cfg["rho0"])
    rho0 = np.zeros((liou.dim, liou.dim), dtype=complex)
    rho0[s0, s0] = 1.0
    times = np.linspace(0.0, cfg["t_final"], cfg["num_times"])
    trajectory = liouville.evolve(liou, rho0, times)
    rows = [
        (f"{t:.6g}", bond, f"{liouville.expect_bond_dw(rho, bond):.10f}")
        for t, rho in zip(times, trajectory)
        for bond in range(1, n)
    ]
    paths = [io.write_csv(out / "dw_bonds.csv", ["t", "bond", "p_dw"], rows, _meta(cfg))]
    if cfg["spectrum_csv"]:
        spec_rows = [
            (f"{lam.real:.12g}", f"{lam.imag:.12g}")
            for lam in liouville.spectrum(liou).eigenvalues
        ]
        paths.append(io.write_csv(out / "liouville_spectrum.csv",
                                  ["re_lambda", "im_lambda"], spec_rows, _meta(cfg)))
    return paths


def _run_noise_check(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    n = cfg["n_sites"]
    spec = spinops.HamiltonianSpec(
        N=n, J=cfg["J"], h=cfg["h"], boundary_bulk_only=cfg["bulk_only"]
    )
    ham = spinops.build_hamiltonian(spec)
    jumps = spinops.build_jump_set(cfg["jumps"], n)
    psi0 = np.zeros(1 << n, dtype=complex)
    psi0[spinops.state_from_string(cfg["psi0"])] = 1.0

    liou = liouville.build_liouvillian(ham, jumps, cfg["gamma"])
    rho0 = np.outer(psi0, psi0.conj())
    n_samples = 11
    sample_times = np.linspace(0.0, cfg["t_final"], n_samples)
    exact = liouville.evolve(liou, rho0, sample_times)

    dist_rows, obs_rows = [], []
    for m in cfg["m_list"]:
        times, rho_bar = noise.ensemble_density(
            ham, jumps, cfg["gamma"], psi0, cfg["dt"], cfg["t_final"],
            m, cfg["seed"], sample_times=sample_times,
        )
        for k, t in enumerate(times):
            dist_rows.append(
                (m, f"{t:.6g}",
                 f"{liouville.trace_distance(rho_bar[k], exact[k]):.8f}")
            )
        if m == max(cfg["m_list"]):
            for k, t in enumerate(times):
                for bond in range(1, n):
                    obs_rows.append(
                        (f"{t:.6g}", bond,
                         f"{liouville.expect_bond_dw(rho_bar[k], bond):.8f}")
                    )
    meta = _meta(cfg, master_seed=cfg["seed"])
    return [
        io.write_csv(out / "noise_trace_distance.csv",
                     ["m_trajectories", "t", "trace_distance"], dist_rows, meta),
        io.write_csv(out / "noise_dw_bonds.csv", ["t", "bond", "p_dw"], obs_rows, meta),
        io.write_json(out / "noise_meta.json", {
            "master_seed": cfg["seed"], "dt": cfg["dt"],
            "m_list": list(cfg["m_list"]),
            "generator": "numpy Philox via SeedSequence.spawn per trajectory",
        }, meta),
    ]


def _census_rows(n: int, kind: str, J: float):
    ham = spinops.build_hamiltonian(spinops.HamiltonianSpec(N=n, J=J))
    classification = dfs.classify_basis(spinops.build_jump_set(kind, n))
    rows = []
    for key in sorted(classification.sectors, key=lambda k: (len(k), sorted(k))):
        sector = dfs.effective_hamiltonian_lind(ham, classification, key)
        components = dfs.graph_components(sector)
        key_bits = "".join(str(b) for b in classification.key_as_tuple(key))
        rows.append((key_bits, sector.dim, len(sector.frozen), len(components)))
    return rows


def _run_sector_census(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    rows = _census_rows(cfg["n_sites"], cfg["jumps"], cfg["J"])
    return [io.write_csv(out / "sector_census.csv",
                         ["key", "dimension", "n_frozen", "n_components"],
                         rows, _meta(cfg))]


def _run_sector_graph(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    n = cfg["n_sites"]
    ham = spinops.build_hamiltonian(spinops.HamiltonianSpec(N=n, J=cfg["J"]))
    classification = dfs.classify_basis(spinops.build_jump_set(cfg["jumps"], n))
    start = spinops.state_from_string(cfg["start"])
    key = classification.key_of(start)
    sector = dfs.effective_hamiltonian_lind(ham, classification, key)
    graph = dfs.sector_graph(sector, start)
    meta = _meta(cfg, n_vertices=graph.n_vertices, n_edges=graph.n_edges)
    return [
        io.write_graph_json(out / "sector_graph.json", graph, n, meta),
        io.write_graph_edgelist(out / "sector_graph_edges.txt", graph),
    ]


def _run_effective_verify(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    kinds = [k.strip() for k in cfg["kinds"].split(",") if k.strip()]
    report = {}
    all_ok = True
    for kind in kinds:
        report[kind] = {}
        for n in cfg["n_sites_list"]:
            res = dfs.verify_local_form(kind, n, cfg["J"])
            report[kind][str(n)] = {"ok": res.ok, "max_deviation": res.max_deviation}
            all_ok &= res.ok
    path = io.write_json(out / "effective_verify.json",
                         {"reports": report, "all_ok": all_ok}, _meta(cfg))
    if not all_ok:
        raise RuntimeError(f"local-form verification failed; see {path}")
    return [path]


def _run_fermion_dynamics(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    n, mode = cfg["n_sites"], cfg["mode"]
    if mode == "single":
        model = fermion.single_particle_stark(n, cfg["J"], cfg["h"])
        label = cfg["initial"][0]
    elif mode == "two_particle_kink":
        model = fermion.two_particle_kink_model(n, cfg["J"], cfg["h"])
        label = tuple(cfg["initial"])
    else:
        raise ValueError(f"dynamics supports single|two_particle_kink, got {mode!r}")
    _check_memory(8 * 3 * float(model.dim) ** 2, cfg["memory_cap_gb"], "dense diagonalization")
    decomposition = spectral.diagonalize(model)
    idx = model.index_of(label)
    psi0 = np.zeros(model.dim, dtype=complex)
    psi0[idx] = 1.0
    t_grid = np.linspace(0.0, cfg["t_final"], cfg["num_times"])
    occ = spectral.evolve_state(decomposition, psi0, t_grid)
    occ_rows = [
        (f"{t:.6g}", mu + 1, f"{occ[k, mu]:.8f}")
        for k, t in enumerate(t_grid)
        for mu in range(model.n_modes)
    ]
    ovl = spectral.overlap_spectrum(idx, decomposition)
    ovl_rows = [(f"{e:.8f}", f"{w:.10f}", f"{p:.8f}") for e, w, p in ovl]
    meta = _meta(cfg)
    return [
        io.write_csv(out / "occupations.csv", ["t", "mu", "n_mu"], occ_rows, meta),
        io.write_csv(out / "overlap_spectrum.csv", ["energy", "overlap", "ipr"], ovl_rows, meta),
    ]


def _ladder_mean_ipr(n, J, g, h, window, disorder, seed) -> float:
    model = fermion.coupled_chain_model(n, J, h, g, disorder, seed)
    decomposition = spectral.diagonalize(model, window_size=window)
    return spectral.mean_ipr_window(decomposition, window).mean


def _run_ipr_scan(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    n = cfg["n_sites"]
    _check_memory(8 * 2.5 * float(n - 1) ** 4, cfg["memory_cap_gb"], "ladder diagonalization")
    h_grid = np.arange(cfg["h_min"], cfg["h_max"] + 0.5 * cfg["h_step"], cfg["h_step"])
    jobs = [(h, seed) for h in h_grid for seed in cfg["seeds"]]

    def one(job):
        h, seed = job
        return h, seed, _ladder_mean_ipr(
            n, cfg["J"], cfg["g"], h, cfg["window"], cfg["disorder"], seed
        )

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        results = list(pool.map(one, jobs))
    rows = [(f"{h:.4f}", n, seed, f"{value:.10f}") for h, seed, value in results]
    return [io.write_csv(out / "ipr_scan.csv", ["h", "n_sites", "seed", "mean_ipr"],
                         rows, _meta(cfg))]


def _run_ipr_scaling(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    sizes = cfg["n_sites_list"]
    biggest = max(sizes)
    _check_memory(8 * 2.5 * float(biggest - 1) ** 4, cfg["memory_cap_gb"], "ladder diagonalization")
    h = 2.0 * cfg["g"]

    def one(n):
        return n, _ladder_mean_ipr(
            n, cfg["J"], cfg["g"], h, cfg["window"], cfg["disorder"], cfg["seed"]
        )

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        points = list(pool.map(one, sizes))
    slope, intercept, residual = spectral.scaling_fit(points)
    meta = _meta(cfg, h=h)
    rows = [(n, f"{v:.10f}") for n, v in points]
    return [
        io.write_csv(out / "ipr_scaling.csv", ["n_sites", "mean_ipr"], rows, meta),
        io.write_json(out / "ipr_scaling_fit.json",
                      {"slope": slope, "intercept": intercept, "rms_residual": residual},
                      meta),
    ]


def _run_heatmap(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    n = cfg["n_sites"]
    _check_memory(8 * 2.5 * float(n - 1) ** 4, cfg["memory_cap_gb"], "ladder diagonalization")
    model = fermion.coupled_chain_model(
        n, cfg["J"], cfg["h"], cfg["g"], cfg["disorder"], cfg["seed"]
    )
    decomposition = spectral.diagonalize(model, window_size=cfg["window"])
    lo, _ = spectral.window_indices(model.dim, cfg["window"])
    state = lo + cfg["state_offset"]
    grid = spectral.eigenstate_heatmap(decomposition, state)
    rows = [
        (mu1 + 1, mu2 + 1, f"{grid[mu1, mu2]:.12g}")
        for mu1 in range(model.n_modes)
        for mu2 in range(model.n_modes)
    ]
    meta = _meta(cfg, eigenstate_index=state,
                 support_90=spectral.support_size(grid.ravel() ** 0.5))
    return [io.write_csv(out / "heatmap.csv", ["mu1", "mu2", "weight"], rows, meta)]


def _run_perturb_report(cfg: ExperimentConfig, out: Path, threads: int) -> list[Path]:
    n, kind = cfg["n_sites"], cfg["jumps"]
    ham = spinops.build_hamiltonian(spinops.HamiltonianSpec(N=n, J=cfg["J"]))
    jumps = spinops.build_jump_set(kind, n)
    classification = dfs.classify_basis(jumps)
    start = spinops.state_from_string(cfg["initial"])

    sector_norms = {}
    for key in sorted(classification.sectors, key=lambda k: (len(k), sorted(k))):
        key_bits = "".join(str(b) for b in classification.key_as_tuple(key))
        block = perturb.second_order_liouvillian(
            ham, jumps, float(cfg["gammas"][0]), key, classification
        )
        sector_norms[key_bits] = float(np.abs(block).max())

    scaling = []
    for gamma in cfg["gammas"]:
        times = perturb.validity_time(cfg["J"], float(gamma), n)
        err = perturb.effective_unitary_error(
            n, cfg["J"], float(gamma), cfg["t"], start, kind=kind
        )
        scaling.append({
            "gamma": float(gamma),
            "trace_distance": err,
            "t_conservative": times.conservative,
            "t_conjectured": times.conjectured,
        })
    payload = {
        "second_order_max_element_at_gamma0": sector_norms,
        "gamma0": float(cfg["gammas"][0]),
        "error_scaling": scaling,
        "evolution_time": cfg["t"],
    }
    return [io.write_json(out / "perturb_report.json", payload, _meta(cfg))]


RUNNERS = {
    "gksl-evolve": _run_gksl_evolve,
    "noise-check": _run_noise_check,
    "sector-census": _run_sector_census,
    "sector-graph": _run_sector_graph,
    "effective-verify": _run_effective_verify,
    "fermion-dynamics": _run_fermion_dynamics,
    "ipr-scan": _run_ipr_scan,
    "ipr-scaling": _run_ipr_scaling,
    "heatmap": _run_heatmap,
    "perturb-report": _run_perturb_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pxqsim",
        description="Dissipation-built constrained spin-chain experiments",
    )
    parser.add_argument("--experiment", required=True, choices=sorted(RUNNERS))
    parser.add_argument("--config", type=Path, default=None,
                        help="INI file with a section per experiment")
    parser.add_argument("--out", type=Path, default=Path("."))
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None,
                        help="override the configured seed(s)")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            config = parse_config(args.config.read_text(encoding="utf-8"), args.experiment)
        else:
            config = ExperimentConfig(args.experiment, {})
        if args.seed is not None:
            params = dict(config.params)
            for name in ("seed", "seeds"):
                if name in params:
                    params[name] = args.seed if name == "seed" else (args.seed,)
            config = ExperimentConfig(args.experiment, params)
        paths = RUNNERS[args.experiment](config, args.out, args.threads)
    except (ValueError, KeyError, ResourceRefusal, RuntimeError) as exc:
        print(f"pxqsim: error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
