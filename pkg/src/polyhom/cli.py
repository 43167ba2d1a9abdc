"""Command-line front end.

    polyhom COMMAND CONFIG [--out DIR]
    polyhom run CONFIG [--out DIR]

``run`` takes the command from the config's ``command`` key.  Exit codes:
0 success, 2 configuration error, 3 math-domain error, 4 validation failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .config import COMMANDS, RunConfig, load_config
from .errors import ConfigError, MathDomainError, PolyhomError, ValidationFailure
from .expansion import MajorantConfig, majorant_report, match_coefficients, run_iteration
from .friedman import friedman_report
from .problems import ln_convention_audit, ln_local_coeffs
from .series import LogSeries, series_to_json
from .singular_ode import residual


class Run:
    """Executes one command; collects files to write and lines to print."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.files: dict[Path, str] = {}
        self.lines: list[str] = []
        self.failure: str | None = None

    def say(self, line: str) -> None:
        self.lines.append(line)

    def emit(self, name: str, default: str, text: str) -> None:
        path = self.cfg.output_path(name, default)
        self.files[path] = text
        self.say(f"wrote {path.name}")

    def fail(self, reason: str) -> None:
        self.failure = self.failure or reason

    # -- helpers -----------------------------------------------------------

    def _problem(self):
        spec = self.cfg.problem
        if spec is None:
            raise ConfigError(f"command {self.command!r} needs a [problem] section")
        prob, datum = spec.build()
        return spec, prob, datum

    def _describe(self, spec, prob) -> None:
        self.say(f"problem {prob.name}")
        self.say(f"roots m_low={prob.m_low} m_high={prob.m_high} K={spec.K} W={spec.W}")

    def _residual_check(self, prob, series: LogSeries) -> bool:
        res = residual(prob, series)
        bad = sorted((i, j) for (i, j), c in res.coeffs.items() if i <= series.K and c)
        ok = not bad
        self.say(f"residual through t^{series.K}: {'zero' if ok else 'nonzero at ' + str(bad[:4])}")
        return ok

    # -- commands ------------------------------------------------------------

    def match(self) -> LogSeries:
        spec, prob, datum = self._problem()
        self._describe(spec, prob)
        series = match_coefficients(prob, datum, spec.K, spec.W)
        self.emit("series", "series.json", series_to_json(series))
        if not self._residual_check(prob, series):
            self.fail("residual of the matched series is nonzero")
        return series

    def expand(self) -> None:
        series = self.match()
        spec, prob, _ = self._problem()
        lines = [f"term_count={len(series.coeffs)}", f"max_log={series.max_log()}"]
        c = series.coefficient(prob.m_high, 1)
        lines.append(f"log_obstruction_zero={c.is_zero()}")
        if prob.dim == 0:
            lines.append(f"log_obstruction={c.constant_term()}")
        exact = spec.exact_solution()
        if exact is not None:
            agree = series.same_terms(exact)
            lines.append(f"matches_closed_form={agree}")
            if not agree:
                self.fail("expansion differs from the closed-form series")
        for (i, j), coeff in series.items():
            if prob.dim == 0:
                lines.append(f"c[{i},{j}]={coeff.constant_term()}")
        self.emit("report", "expansion.txt", "\n".join(lines) + "\n")
        self.lines.extend(lines[:4])

    def iterate(self) -> None:
        spec, prob, datum = self._problem()
        self._describe(spec, prob)
        series, trace = run_iteration(prob, datum, spec.K, spec.W)
        self.emit("series", "series.json", series_to_json(series))
        if not self._residual_check(prob, series):
            self.fail("residual of the iterated series is nonzero")
        try:
            mcfg = MajorantConfig(threshold=self.cfg.tolerances["decay_ratio"], **self.cfg.majorant)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[majorant]: {exc}") from exc
        report = majorant_report(trace, mcfg)
        self.emit("majorant", "majorant.csv", report.to_csv())
        self.say(f"picard_steps={len(trace.steps)}")
        self.say(f"fitted_ratio={report.ratio:.6e} threshold={mcfg.threshold}")
        if report.fit_points < 2:
            self.say(f"iteration terminated after {len(trace.steps)} increments; nothing left to fit after the burn-in")
        self.say(f"decay verdict: {'PASS' if report.passed else 'FAIL'}")
        if not report.passed:
            self.fail("majorant norms do not decay geometrically")

    def validate(self) -> None:
        import numpy as np

        from .validate import (
            calibrated_solve, grid_csv, negativity_margin, radial_case, remainder_slopes,
            resolvable_orders, slopes_csv, tangential_growth_fit,
        )

        spec, prob, datum = self._problem()
        self._describe(spec, prob)
        tol = self.cfg.tolerances
        opts = self.cfg.validate
        try:
            case = radial_case(spec.kind, spec.n, float(spec.R))
        except MathDomainError as exc:
            raise ConfigError(f"validate: {exc}") from exc
        full = match_coefficients(prob, datum, spec.K, spec.W)
        series = full.at_origin()
        r = opts.get("r", 0.5)
        t_min = opts.get("t_min", 1e-4)
        if not 0 < t_min < r < 1:
            raise ConfigError("[validate] needs 0 < t_min < r < 1")
        inner = series.evaluate(t_min)
        outer = float(case.exact(np.array([r]))[0])
        sol, err = calibrated_solve(
            case.form, inner, outer, case.exact, tol["grid_error"], r, opts.get("start_points", 2001)
        )
        self.say(f"grid points={len(sol.t)} max_error={err:.3e} target={tol['grid_error']:.1e}")
        margin = negativity_margin(case.form, sol)
        self.say(f"negativity margin={margin:.6f} expected={case.expected_margin}")
        if margin >= 0:
            self.fail("2A + 2P + Q is not negative near the boundary")

        ks = list(range(1, spec.K - 1))
        window = (opts.get("window_low", 1e-3), opts.get("window_high", 1e-1))
        oracle = remainder_slopes(case.exact_mp, series, ks, window)
        gwin = (opts.get("grid_window_low", 5e-2), opts.get("grid_window_high", 3e-1))
        gks = resolvable_orders(sol, series, ks, gwin, err)
        grid_fits = remainder_slopes(sol, series, gks, gwin, noise_floor=10 * err) if gks else []
        every = self.cfg.outputs.get("grid_every", max(1, len(sol.t) // 400))
        self.emit("grid", "grid.csv", grid_csv(sol, series, [1, 2, 3], case.exact, every=every))
        text = "source,k,slope,expected,deviation,within_tol\n"
        for label, fits in (("oracle", oracle), ("grid", grid_fits)):
            for row in slopes_csv(fits, tol["slope"]).splitlines()[1:]:
                text += f"{label},{row}\n"
        self.emit("slopes", "slopes.csv", text)
        worst = max((f.deviation for f in oracle + grid_fits if f.deviation is not None), default=0.0)
        self.say(f"slopes: oracle k=1..{ks[-1] if ks else 0}, grid k={gks}, worst deviation={worst:.4f} tol={tol['slope']}")
        if err >= tol["grid_error"]:
            self.fail("grid error above target")
        if worst > tol["slope"]:
            self.fail("remainder slope outside tolerance")
        if spec.kind == "hemisphere" and spec.tangential_degree >= 6:
            fit = tangential_growth_fit(full)
            radius = fit.radius / float(spec.R)
            self.say(f"tangential radius ratio={radius:.4f} range=[{tol['growth_low']}, {tol['growth_high']}]")
            if not tol["growth_low"] <= radius <= tol["growth_high"]:
                self.fail("tangential growth radius outside range")

    def ln_coeffs(self) -> None:
        curv = self.cfg.curvature
        n = curv.get("n", self.cfg.problem.n if self.cfg.problem else None)
        if n is None:
            raise ConfigError("ln-coeffs needs n in [curvature] or [problem]")
        lines = []
        if {"H", "K"} <= curv.keys():
            H, K, lap = curv["H"], curv["K"], curv.get("lap_H", Fraction(0))
            # H read as the sum of principal curvatures, then as their average
            for label, h in (("sum", H), ("average", H / (n - 1))):
                c = ln_local_coeffs(n, h, K, lap)
                lines.append(f"{label}: c1={c.c1} c31={'' if c.c31 is None else c.c31}")
        audit = ln_convention_audit(n)
        for label, c in (("sum", audit.sum_convention), ("average", audit.average_convention)):
            lines.append(
                f"unit_ball_{label}: c1={c.c1} c31={'' if c.c31 is None else c.c31} "
                f"c1_matches={audit.c1_matches[label]} log_matches={audit.log_matches[label]}"
            )
        lines.append(f"unit_ball_computed: c1={audit.computed_c1} c{n}1={audit.computed_log}")
        self.emit("report", "ln_coeffs.txt", "\n".join(lines) + "\n")
        self.lines.extend(lines)

    def friedman(self) -> None:
        f = self.cfg.friedman
        rep = friedman_report(
            f.get("A0", 1), f.get("A1", 1), f.get("A2", 1), f.get("B0", 1),
            f.get("p", 12), f.get("a_max_index", 20),
        )
        self.emit("report", "friedman.txt", rep.to_text())
        self.emit("checks", "composition_checks.csv", rep.checks_csv())
        self.lines.extend(rep.to_text().splitlines())
        if not rep.passed:
            self.fail("composition bound check failed")

    def execute(self) -> None:
        handler = {"ln-coeffs": self.ln_coeffs}.get(self.command) or getattr(self, self.command)
        handler()


def execute(cfg: RunConfig, command: str) -> Run:
    """Run a command and write its artifacts; raises ValidationFailure after writing if a check failed."""
    run = Run(cfg, command)
    run.execute()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    for path, text in run.files.items():
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyhom", description="Polyhomogeneous expansions of singular boundary problems.")
    parser.add_argument("command", choices=("run",) + COMMANDS, help="what to do ('run' reads it from the config)")
    parser.add_argument("config", help="keyed-text configuration file")
    parser.add_argument("--out", help="output directory (overrides [output] dir)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.output_dir = Path(args.out)
        command = cfg.command if args.command == "run" else args.command
        if command is None:
            raise ConfigError("'run' needs a command key in the config")
        run = execute(cfg, command)
    except PolyhomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    for line in run.lines:
        print(line)
    if run.failure:
        print(f"validation failure: {run.failure}", file=sys.stderr)
        return ValidationFailure.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
