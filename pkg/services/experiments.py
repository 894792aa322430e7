"""
Запуск экспериментов: расчёт и запись данных для графиков
"""
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from analytics.condmom import (
    implied_peclet,
    normalized_x_mean_given_y,
    transverse_variance_ratio,
    x_moments_given_y,
    y_moments_given_x,
)
from analytics.contours import contour_export, contours_frame, levels_from_fractions
from analytics.giddings import profile_1d, regime_check
from analytics.moments import effective_coefficients, moment_curve, moments_S, moments_S_discrete, sigma_ff_sq
from analytics.planar import Grid2D, default_grid, full_2d, transverse_only
from core.params import DiscreteKinetics, Phase, derive
from simulation.lattice import LatticeConfig, lattice_moments, run_lattice
from simulation.particle import free_residence_histogram, run_ensemble
from utils.config import ExperimentConfig
from utils.export import field_frame, write_csv, write_grid
from utils.logger import setup_logger

logger = setup_logger()


def _tag(t: float) -> str:
    return f"t{t:g}"


def _phase_label(phase: Phase | None) -> str:
    return "total" if phase is None else phase.value


class ExperimentRunner:
    """
    Запуск одного вида эксперимента по конфигурации
    """

    def __init__(self, config: ExperimentConfig):
        """
        Args:
            config: Конфигурация эксперимента (с учётом флагов CLI)
        """
        self.config = config
        self.out_dir = Path(config.output.directory)
        self.written: list[Path] = []

    @property
    def metadata(self) -> dict:
        """Параметры запуска для заголовка CSV"""
        c = self.config
        return {
            "experiment": c.experiment,
            "v": c.transport.v,
            "d_l": c.transport.d_l,
            "d_t": c.transport.d_t,
            "lambda": c.kinetics.lambda_,
            "mu": c.kinetics.mu,
            "initial": c.run.initial,
            "seed": c.run.seed,
        }

    def _write(self, frame: pd.DataFrame, name: str, **extra) -> Path:
        path = write_csv(frame, self.out_dir / name, {**self.metadata, **extra}, self.config.output.timestamp)
        self.written.append(path)
        return path

    def run(self) -> list[Path]:
        """
        Выполнить эксперимент из config.experiment

        Returns:
            list[Path]: Записанные файлы
        """
        handlers = {
            "simulate": self.simulate,
            "lattice": self.lattice,
            "moments": self.moments,
            "plume1d": self.plume1d,
            "plume2d": self.plume2d,
            "condmom": self.condmom,
        }
        kind = self.config.experiment
        logger.info(f"Эксперимент {kind}: времена {self.config.run.times}, каталог {self.out_dir}")
        handlers[kind]()
        logger.info(f"Эксперимент {kind} завершён, файлов: {len(self.written)}")
        return self.written

    def simulate(self):
        """Ансамбль частиц: записи, гистограмма tau и сводка моментов против аналитики"""
        c = self.config
        rows = []
        for t in c.run.times:
            ensemble, records = run_ensemble(
                c.kinetics, c.transport, t, c.run.n, c.run.initial, c.run.seed, c.run.dims, c.run.threads
            )
            analytic = moments_S(c.kinetics, c.transport, t, initial=c.run.initial)
            rows.append({
                "t": t,
                "count": ensemble.count,
                "mean": ensemble.centroid,
                "variance": ensemble.variance,
                "skewness": ensemble.skewness,
                "kurtosis": ensemble.kurtosis,
                "se_mean": ensemble.standard_errors.get("mean"),
                "se_variance": ensemble.standard_errors.get("variance"),
                "free_count": ensemble.free.count,
                "free_mean": ensemble.free.mean,
                "free_variance": ensemble.free.variance,
                "adsorbed_count": ensemble.adsorbed.count,
                "adsorbed_mean": ensemble.adsorbed.mean,
                "adsorbed_variance": ensemble.adsorbed.variance,
                "analytic_mean": analytic.mean,
                "analytic_variance": analytic.variance,
            })
            self._write(records.to_frame(), f"simulate_particles_{_tag(t)}.csv", t=t, n=c.run.n, dims=c.run.dims)

            hist = free_residence_histogram(records, c.run.bins)
            frame = pd.DataFrame({
                "tau_left": hist.edges[:-1],
                "tau_right": hist.edges[1:],
                "count": hist.counts,
                "density": hist.density,
            })
            self._write(frame, f"simulate_residence_{_tag(t)}.csv", t=t, n=c.run.n,
                        atom_zero=hist.atom_zero, atom_horizon=hist.atom_horizon)

        self._write(pd.DataFrame(rows), "simulate_stats.csv", n=c.run.n, dims=c.run.dims)

    def lattice(self):
        """Решётка: снимки вероятностей и моменты против формул дискретной схемы"""
        c = self.config
        rows = []
        for t in c.run.times:
            cfg = LatticeConfig.build(c.transport, c.lattice.dt, t, c=c.lattice.c)
            state = run_lattice(cfg, c.kinetics, c.run.initial, c.lattice.steps)
            moments = lattice_moments(state, cfg)

            dk = DiscreteKinetics.from_rates(c.kinetics, cfg.dt, max(state.n, 1))
            discrete = moments_S_discrete(dk, c.transport, c.run.initial)
            rows.append({
                "t": state.n * cfg.dt,
                "steps": state.n,
                "mass": state.mass,
                "mean": moments.total.mean,
                "variance": moments.total.variance,
                "skewness": moments.total.skewness,
                "kurtosis": moments.total.kurtosis,
                "free_mass": moments.free.mass,
                "free_mean": moments.free.mean,
                "adsorbed_mass": moments.adsorbed.mass,
                "adsorbed_mean": moments.adsorbed.mean,
                "discrete_mean": discrete.mean,
                "discrete_variance": discrete.variance,
            })
            self._write(state.to_frame(cfg), f"lattice_{_tag(t)}.csv", t=t, dt=cfg.dt, c=cfg.c, dx=cfg.dx)

        self._write(pd.DataFrame(rows), "lattice_moments.csv", dt=c.lattice.dt)

    def moments(self):
        """Аналитические моменты по времени: без условия и с условием на фазу"""
        c = self.config
        times = sorted(c.run.times)
        frames = [moment_curve(c.kinetics, c.transport, times, phase, c.run.initial)
                  for phase in (None, Phase.FREE, Phase.ADSORBED)]
        self._write(pd.concat(frames, ignore_index=True), "moments.csv")

        rows = []
        for t in times:
            v_eff, d_eff = effective_coefficients(c.kinetics, c.transport, t, c.run.initial)
            report = regime_check(t, c.kinetics)
            rows.append({
                "t": t,
                "v_eff": v_eff,
                "d_eff": d_eff,
                "sigma_ff_sq": sigma_ff_sq(c.kinetics, c.transport, t) if c.kinetics.mu > 0 else np.nan,
                "regime": report.regime.value,
                "tau_skewness": report.skewness,
                "tau_excess_kurtosis": report.excess_kurtosis,
            })
        dq = derive(c.kinetics, c.transport)
        self._write(pd.DataFrame(rows), "moments_effective.csv", v_star=dq.v_star, d_star=dq.d_star)

    def _x_grid_1d(self, t: float) -> tuple[np.ndarray, bool]:
        g = self.config.grid
        if g.scaled:
            edges = np.linspace(g.x_min if g.x_min is not None else -4.0, g.x_max if g.x_max is not None else 4.0,
                                g.nx + 1)
        else:
            edges = np.linspace(g.x_min if g.x_min is not None else 0.0,
                                g.x_max if g.x_max is not None else self.config.transport.v * t, g.nx + 1)
        return 0.5 * (edges[1:] + edges[:-1]), g.scaled

    def plume1d(self):
        """Профили облака без локальной дисперсии, по снимку на каждое время"""
        c = self.config
        for t in c.run.times:
            grid, scaled = self._x_grid_1d(t)
            profile = profile_1d(t, c.kinetics, c.transport.v, grid, c.run.initial, scaled=scaled)
            frame = pd.DataFrame({
                "x": profile.x,
                "x_hat": profile.x_hat if profile.x_hat is not None else np.nan,
                "n_free": profile.n_free,
                "n_adsorbed": profile.n_adsorbed,
                "n_total": profile.n_total,
                "gaussian_ref": profile.gaussian_ref,
            })
            report = regime_check(t, c.kinetics)
            self._write(frame, f"plume1d_{_tag(t)}.csv", t=t, atom_x0=profile.atom_x0,
                        atom_xvt=profile.atom_xvt, regime=report.regime)

    def _grid_2d(self, t: float) -> Grid2D:
        g = self.config.grid
        return default_grid(self.config.kinetics, self.config.transport, t, g.nx, g.ny, g.x_min, g.x_max, g.y_max)

    def plume2d(self):
        """Двумерные поля по фазам, бинарные сетки и изолинии"""
        c = self.config
        for t in c.run.times:
            grid = self._grid_2d(t)
            for phase in (Phase.FREE, Phase.ADSORBED, None):
                if c.transport.d_l > 0:
                    field = full_2d(c.run.initial, phase, t, c.kinetics, c.transport, grid,
                                    tol=c.numerics.quad_tol, max_panels=c.numerics.max_panels,
                                    threads=c.run.threads)
                else:
                    field = transverse_only(c.run.initial, phase, t, c.kinetics, c.transport.v,
                                            c.transport.d_t, grid)
                label = f"{_phase_label(phase)}_{_tag(t)}"
                extra = {"t": t, "phase": _phase_label(phase), "atom_origin": field.atom_origin,
                         "atom_line": field.atom_line, "line_x": field.line_x}
                self._write(field_frame(field), f"plume2d_{label}.csv", **extra)
                self.written.append(write_grid(field, self.out_dir / f"plume2d_{label}.grid"))

                if field.x_hat is not None and np.max(field.values) > 0:
                    levels = levels_from_fractions(field, c.grid.levels)
                    lines = contour_export(field, levels)
                    self._write(contours_frame(lines), f"plume2d_contours_{label}.csv", **extra)

    def condmom(self):
        """Условные моменты: x-моменты при фиксированном y и y-моменты при фиксированном x"""
        c = self.config
        for t in c.run.times:
            grid = self._grid_2d(t)
            for phase in c.condmom.phases:
                frames = [
                    x_moments_given_y(order, phase, grid.y, t, c.kinetics, c.transport,
                                      tol=c.numerics.quad_tol, max_panels=c.numerics.max_panels).to_frame()
                    for order in c.condmom.orders
                ]
                frames.append(normalized_x_mean_given_y(phase, grid.y, t, c.kinetics, c.transport,
                                                        tol=c.numerics.quad_tol).to_frame()
                              .assign(order="mean"))
                self._write(pd.concat(frames, ignore_index=True), f"condmom_y_{phase.value}_{_tag(t)}.csv", t=t)

            if c.transport.d_l <= 0:
                logger.warning("D_L = 0: y-моменты при фиксированном x через изображения не строятся")
                continue

            x = grid.x[grid.x > 0]
            frames = [
                y_moments_given_x(order, phase, x, t, c.kinetics, c.transport,
                                  n_terms=c.condmom.stehfest_n, threads=c.run.threads).to_frame()
                for phase in c.condmom.phases
                for order in (0, 2)
            ]
            ratio = transverse_variance_ratio(x, t, c.kinetics, c.transport, n_terms=c.condmom.stehfest_n,
                                              threads=c.run.threads)
            frames.append(ratio.to_frame().assign(order="ratio"))
            extra = {"t": t, "stehfest_n": c.condmom.stehfest_n}
            if c.transport.d_t > 0:
                extra["implied_peclet"] = implied_peclet(c.transport)
            self._write(pd.concat(frames, ignore_index=True), f"condmom_x_{_tag(t)}.csv", **extra)


def apply_overrides(config: ExperimentConfig, seed=None, out=None, threads=None, no_timestamp=False) -> ExperimentConfig:
    """Флаги командной строки поверх конфигурации"""
    run = config.run
    output = config.output
    if seed is not None:
        run = replace(run, seed=seed)
    if threads is not None:
        run = replace(run, threads=threads)
    if out is not None:
        output = replace(output, directory=Path(out))
    if no_timestamp:
        output = replace(output, timestamp=False)
    return replace(config, run=run, output=output)
