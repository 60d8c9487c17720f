"""Scenario runners used by the command-line front end.

Each runner declares a parameter schema (a dict of defaults), validates a
parameter record against it and executes the scenario with a seeded
generator. A run returns plain results, a list of tolerance checks and
optional CSV tables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

PRNG_NAME = "numpy.random.PCG64"


class ValidationError(ValueError):
    """A scenario does not match the schema of its module."""


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    relation: str = "<="

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        if self.relation == "<=":
            return self.value <= self.tolerance
        if self.relation == ">=":
            return self.value >= self.tolerance
        if self.relation == "==":
            return self.value == self.tolerance
        raise ValueError(self.relation)

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "relation": self.relation, "passed": self.passed}


@dataclass
class Outcome:
    results: dict
    checks: list
    tables: dict = field(default_factory=dict)   # name -> (header, rows)


def _type_ok(default, value) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, list):
        return isinstance(value, list)
    if isinstance(default, dict):
        return isinstance(value, dict)
    return default is None


def _complex(x, name):
    try:
        return complex(x.replace(" ", "")) if isinstance(x, str) else complex(x)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: cannot read {x!r} as a complex number") from exc


def _spin(x, name):
    try:
        s = Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"{name}: {x!r} is not a spin") from exc
    if s <= 0 or (2 * s).denominator != 1:
        raise ValidationError(f"{name}: {x!r} is not a positive half-integer")
    return s


class Runner:
    module: str = ""
    defaults: dict = {}

    def validate(self, params: dict) -> dict:
        if not isinstance(params, dict):
            raise ValidationError("params must be a key-value mapping")
        unknown = sorted(set(params) - set(self.defaults))
        if unknown:
            raise ValidationError(f"unknown parameters for {self.module}: {unknown}")
        out = dict(self.defaults)
        for key, value in params.items():
            if not _type_ok(self.defaults[key], value):
                raise ValidationError(f"{self.module}.{key}: expected {type(self.defaults[key]).__name__}, "
                                      f"got {type(value).__name__}")
            out[key] = value
        self.check(out)
        return out

    def check(self, p: dict) -> None:
        """Module-specific validation; raise :class:`ValidationError`."""

    def run(self, p: dict, rng: np.random.Generator) -> Outcome:
        raise NotImplementedError


# spinalg ---------------------------------------------------------------------

class SpinalgRunner(Runner):
    """Ground block of ``1/2 (S_tot)^2`` on a few sites and the trace inequality."""

    module = "spinalg"
    defaults = {"spins": [0.5, 0.5, 0.5, 0.5], "expected_degeneracy": -1,
                "kls_instances": 0, "kls_max_dim": 16, "tolerance": 1e-10, "kls_tolerance": 1e-12}

    def check(self, p):
        if not p["spins"]:
            raise ValidationError("spins must not be empty")
        for s in p["spins"]:
            _spin(s, "spins")
        dim = np.prod([2 * float(s) + 1 for s in p["spins"]])
        if dim > 4096:
            raise ValidationError(f"Hilbert space dimension {int(dim)} exceeds 4096")
        if p["kls_instances"] < 0 or not 1 <= p["kls_max_dim"] <= 64:
            raise ValidationError("kls_instances >= 0 and 1 <= kls_max_dim <= 64 required")

    def run(self, p, rng):
        from .spinalg import HilbertSpace, eigensolve, kls_trace_inequality_residual, total_spin_squared

        space = HilbertSpace.spins([_spin(s, "spins") for s in p["spins"]])
        s2 = total_spin_squared(space)
        h = s2.matrix * 0.5
        res = eigensolve(h, k=1)
        vecs = res.ground_block()
        s2_vals = [float(s2.expectation(v).real) for v in vecs.T]
        results = {"dimension": space.dim, "ground_energy": float(res.eigenvalues[0]),
                   "degeneracy": int(vecs.shape[1]), "s2": s2_vals}
        checks = [Check("max_ground_s2", max(abs(x) for x in s2_vals), p["tolerance"])]
        if p["expected_degeneracy"] >= 0:
            checks.append(Check("degeneracy", results["degeneracy"], p["expected_degeneracy"], "=="))
        if p["kls_instances"]:
            worst = np.inf
            for _ in range(p["kls_instances"]):
                m, n = rng.integers(1, p["kls_max_dim"] + 1, size=2)
                c = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
                mm = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
                nn = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                worst = min(worst, kls_trace_inequality_residual(c, mm, nn))
            results["kls_min_residual"] = float(worst)
            checks.append(Check("kls_min_residual", float(worst), -p["kls_tolerance"], ">="))
        return Outcome(results, checks)


# frustration -----------------------------------------------------------------

class FrustrationRunner(Runner):
    """Ground block, ice rule and field response of a checkerboard lattice."""

    module = "frustration"
    defaults = {"Lx": 2, "Ly": 2, "periodic": True, "s": 0.5, "expected_degeneracy": -1,
                "tolerance": 1e-10, "susceptibility": False, "betas": [],
                "fields": [-0.2, -0.1, 0.1, 0.2]}

    def check(self, p):
        from .frustration import build_checkerboard

        _spin(p["s"], "s")
        try:
            lat, space = build_checkerboard(p["Lx"], p["Ly"], p["periodic"], p["s"])
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        if space.dim > 65536:
            raise ValidationError(f"Hilbert space dimension {space.dim} exceeds 65536")
        if (p["susceptibility"] or p["betas"]) and not lat.fully_periodic:
            raise ValidationError("field bounds need a periodic lattice")
        if p["betas"] and space.dim > 256:
            raise ValidationError("finite-temperature check uses full diagonalization; at most 256 states")
        if any(not isinstance(b, (int, float)) or b <= 0 for b in p["betas"]):
            raise ValidationError("betas must be positive numbers")
        if any(not isinstance(b, (int, float)) or b == 0 for b in p["fields"]):
            raise ValidationError("fields must be nonzero numbers")

    def run(self, p, rng):
        from .frustration import (build_checkerboard, checkerboard_hamiltonian, finite_temperature_check,
                                  ground_state_report, susceptibility_check)

        lat, space = build_checkerboard(p["Lx"], p["Ly"], p["periodic"], p["s"])
        rep = ground_state_report(checkerboard_hamiltonian(lat, space), space, lat)
        tol = p["tolerance"]
        results = {"sites": lat.n_sites, "boxes": len(lat.boxes), "dimension": space.dim,
                   "e0": rep["e0"], "degeneracy": rep["degeneracy"], "s2": rep["s2"],
                   "stot": [round(x, 9) for x in rep["stot"]], "ice_rule_max_abs": rep["ice_rule_max_abs"]}
        checks = [Check("max_ground_s2", max(abs(x) for x in rep["s2"]), tol),
                  Check("ice_rule_max_abs", rep["ice_rule_max_abs"], tol)]
        if p["expected_degeneracy"] >= 0:
            checks.append(Check("degeneracy", rep["degeneracy"], p["expected_degeneracy"], "=="))
        rows = [[k, v, rep["box_s1"][k][v], rep["box_s3"][k][v]]
                for k in range(len(lat.boxes)) for v in range(rep["degeneracy"])]
        tables = {"box_magnetization": (["box", "vector", "s1", "s3"], rows)}
        if p["susceptibility"]:
            sus = susceptibility_check(lat, space, p["fields"])
            results["susceptibility"] = {
                "chi": sus["chi_estimate"], "chi_error": sus["chi_error"], "chi_loc_max": sus["chi_loc_max"],
                "min_residual": sus["min_residual"], "local_min_residual": sus["local_min_residual"]}
            checks += [Check("field_bound_min_residual", sus["min_residual"], -1e-9, ">="),
                       Check("local_field_bound_min_residual", sus["local_min_residual"], -1e-9, ">="),
                       Check("chi", sus["chi_estimate"], 1 / 8 + 1e-6),
                       Check("chi_loc_max", sus["chi_loc_max"], 1 / 4 + 1e-6)]
        if p["betas"]:
            ft = finite_temperature_check(lat, space, [float(b) for b in p["betas"]], p["fields"])
            results["finite_temperature"] = {"min_residual": ft["min_residual"],
                                             "max_abs_magnetization": ft["max_abs_magnetization"]}
            checks.append(Check("free_energy_min_residual", ft["min_residual"], -1e-9, ">="))
        return Outcome(results, checks, tables)


# wehrl -----------------------------------------------------------------------

class WehrlRunner(Runner):
    """Wehrl entropy: coherent states, random states or a Lieb scan."""

    module = "wehrl"
    defaults = {"task": "coherent", "spins": [1.0], "theta": 0.7, "phi": 1.9, "n_states": 20,
                "n_samples": 10, "optimizer_steps": 200, "tolerance": 1e-8}
    tasks = ("coherent", "random-states", "lieb-scan")

    def check(self, p):
        if p["task"] not in self.tasks:
            raise ValidationError(f"task must be one of {self.tasks}")
        if not p["spins"]:
            raise ValidationError("spins must not be empty")
        for j in p["spins"]:
            if _spin(j, "spins") > 6:
                raise ValidationError("spins above 6 are not supported")
        if p["n_states"] < 1 or p["n_samples"] < 1 or p["optimizer_steps"] < 1:
            raise ValidationError("counts must be positive")

    def run(self, p, rng):
        from .wehrl import (SpinState, coherent_state, lieb_conjecture_scan, majorana_factorize,
                            wehrl_entropy_formula, wehrl_entropy_quadrature)

        results, checks, rows = {}, [], []
        for j in p["spins"]:
            js = _spin(j, "spins")
            key = str(js)
            target = float(2 * js / (2 * js + 1))
            if p["task"] == "coherent":
                cs = coherent_state(js, p["theta"], p["phi"])
                sw = wehrl_entropy_formula(majorana_factorize(cs))
                quad = wehrl_entropy_quadrature(cs)
                results[key] = {"S_W": sw, "S_W_quadrature": quad, "coherent_value": target}
                checks.append(Check(f"j={key}: |S_W - 2j/(2j+1)|", abs(sw - target), p["tolerance"]))
                rows.append([key, sw, quad, target])
            elif p["task"] == "random-states":
                diffs = []
                for _ in range(p["n_states"]):
                    s = SpinState.random(js, rng)
                    diffs.append(abs(wehrl_entropy_formula(majorana_factorize(s)) - wehrl_entropy_quadrature(s)))
                results[key] = {"max_formula_vs_quadrature": max(diffs), "n_states": p["n_states"]}
                checks.append(Check(f"j={key}: formula vs quadrature", max(diffs), p["tolerance"]))
                rows.append([key, max(diffs), p["n_states"]])
            else:
                scan = lieb_conjecture_scan(js, p["n_samples"], p["optimizer_steps"],
                                            seed=int(rng.integers(2**31)))
                results[key] = {"min_entropy": scan["min_entropy"], "coherent_value": target,
                                "argmin_points": scan["argmin_points"]}
                checks.append(Check(f"j={key}: min S_W - 2j/(2j+1)", scan["min_entropy"] - target, -1e-7, ">="))
                rows.append([key, scan["min_entropy"], target])
        header = {"coherent": ["j", "S_W", "S_W_quadrature", "coherent_value"],
                  "random-states": ["j", "max_formula_vs_quadrature", "n_states"],
                  "lieb-scan": ["j", "min_entropy", "coherent_value"]}[p["task"]]
        return Outcome(results, checks, {p["task"]: (header, rows)})


# hubbard ---------------------------------------------------------------------

class HubbardRunner(Runner):
    """Symmetry generators, the symmetric family and the two-site twist."""

    module = "hubbard"
    defaults = {"chains": [2, 3], "u": 1.3, "t": 0.7, "draws": 10, "q_values": [0.5, 1.0, 2.0],
                "tolerance": 1e-12}

    def check(self, p):
        if not p["chains"] or any(not isinstance(n, int) or not 1 <= n <= 4 for n in p["chains"]):
            raise ValidationError("chains must list sizes between 1 and 4")
        if any(not isinstance(q, (int, float)) or q <= 0 for q in p["q_values"]):
            raise ValidationError("q_values must be positive")
        if p["draws"] < 0:
            raise ValidationError("draws must be nonnegative")

    def run(self, p, rng):
        from .hubbard import (FermiSpace, HubbardParams, commutation_report, hsym_hamiltonian,
                              standard_hubbard, symmetry_generators, twist_operator_check)

        tol = p["tolerance"]
        results, checks = {"commutators": {}, "twist": {}}, []
        for n in p["chains"]:
            fs = FermiSpace(n)
            h = standard_hubbard(HubbardParams(u=p["u"], mu=p["u"] / 2, t=p["t"]), n, fs=fs)
            rep = commutation_report(h, symmetry_generators(fs))
            results["commutators"][str(n)] = rep
            checks.append(Check(f"chain {n}: max commutator", max(rep.values()), tol))
        if p["draws"]:
            fs = FermiSpace(2)
            gens = symmetry_generators(fs)
            agree = 0
            for k in range(p["draws"]):
                u, mu, t, r, s = rng.uniform(-1, 1, 5)
                vsym = r + s + u - 2 * mu
                v = vsym if k % 2 == 0 else vsym + rng.uniform(0.1, 1.0) * rng.choice([-1, 1])
                hp = HubbardParams(u=u, mu=mu, t=t, r=r, s=s, v=v, z=complex(*rng.uniform(-1, 1, 2)))
                commutes = max(commutation_report(hsym_hamiltonian(hp, 2, fs=fs), gens).values()) < 1e-10
                agree += commutes == (k % 2 == 0)
            results["symmetric_family_agreement"] = f"{agree}/{p['draws']}"
            checks.append(Check("symmetric family iff draws", agree, p["draws"], "=="))
        for q in p["q_values"]:
            tw = twist_operator_check(float(q))
            results["twist"][repr(float(q))] = tw
            checks.append(Check(f"q={float(q)!r}: M D_c M* - D_q", max(tw["coproduct_residuals"].values()), tol))
            checks.append(Check(f"q={float(q)!r}: M M* - (1 + 2 beta^2 xi)", tw["MMstar_measured_residual"], tol))
        return Outcome(results, checks)


# laxflow ---------------------------------------------------------------------

class LaxRunner(Runner):
    """Factorization solution of the Lax flow against an RK4 reference."""

    module = "laxflow"
    defaults = {"n": 3, "k": 2, "twist": "identity", "delta": [], "systems": 3, "t_max": 1.0,
                "n_times": 5, "tolerance": 1e-6}

    def check(self, p):
        if not 2 <= p["n"] <= 6 or not 1 <= p["k"] <= 4:
            raise ValidationError("need 2 <= n <= 6 and 1 <= k <= 4")
        if p["systems"] < 1 or p["n_times"] < 1 or p["t_max"] <= 0:
            raise ValidationError("systems, n_times and t_max must be positive")
        try:
            self._twist(p).check(p["n"])
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc

    @staticmethod
    def _twist(p):
        from .laxflow import Twist

        if p["twist"] == "diagonal":
            return Twist("diagonal", tuple(float(d) for d in p["delta"]))
        if p["twist"] in ("identity", "chevalley"):
            return Twist(p["twist"])
        raise ValidationError("twist must be identity, diagonal or chevalley")

    def run(self, p, rng):
        from .laxflow import hamiltonian_value, lax_ode_reference, lax_solve_by_factorization, sample_lax_system

        twist = self._twist(p)
        times = np.linspace(p["t_max"] / p["n_times"], p["t_max"], p["n_times"])
        err = drift = hdrift = 0.0
        rows = []
        for m in range(p["systems"]):
            sys = sample_lax_system(p["n"], p["k"], rng, twist, t_max=p["t_max"])
            ev0 = np.sort_complex(np.linalg.eigvals(sys.L0))
            h0 = [hamiltonian_value(sys.L0, k, twist) for k in (1, 2, 3)]
            for L, t in zip(lax_solve_by_factorization(sys, times), times):
                e = float(np.abs(L - lax_ode_reference(sys, t)).max())
                err = max(err, e)
                if twist.kind == "identity":
                    drift = max(drift, float(np.abs(np.sort_complex(np.linalg.eigvals(L)) - ev0).max()))
                hdrift = max(hdrift, max(abs(hamiltonian_value(L, k, twist) - h) for k, h in zip((1, 2, 3), h0)))
                rows.append([m, float(t), e])
        results = {"max_factorization_vs_rk4": err, "max_invariant_drift": hdrift}
        checks = [Check("factorization vs RK4", err, p["tolerance"]),
                  Check("invariant drift", hdrift, 1e-9)]
        if twist.kind == "identity":
            results["max_spectrum_drift"] = drift
            checks.append(Check("spectrum drift", drift, 1e-8))
        return Outcome(results, checks, {"rk4_error": (["system", "t", "max_abs_error"], rows)})


# elliptic --------------------------------------------------------------------

class EllipticRunner(Runner):
    """Dynamical Yang-Baxter and RLL residuals, and the difference operator on a window."""

    module = "elliptic"
    defaults = {"tau": "0.1+0.9j", "eta": "0.13+0.02j", "c": 0.7, "N": 2, "points": 20,
                "window": [4, 4], "base": [], "tolerance": 1e-9}

    def check(self, p):
        from .elliptic import EllipticParams
        from .spinalg import DomainError

        try:
            EllipticParams(tau=_complex(p["tau"], "tau"), eta=_complex(p["eta"], "eta"), c=p["c"], N=p["N"])
        except DomainError as exc:
            raise ValidationError(str(exc)) from exc
        if p["N"] > 4:
            raise ValidationError("N above 4 is not supported")
        if len(p["window"]) != p["N"] or any(not isinstance(w, int) or w < 2 for w in p["window"]):
            raise ValidationError("window needs N integer sizes of at least 2")
        if int(np.prod(p["window"])) > 4096:
            raise ValidationError("window has more than 4096 points")
        if p["base"] and len(p["base"]) != p["N"]:
            raise ValidationError("base needs N entries")
        if p["points"] < 1:
            raise ValidationError("points must be positive")

    def run(self, p, rng):
        from .elliptic import (EllipticParams, dybe_residual, lattice_points, rll_residual, ruijsenaars_apply,
                               sample_generic_point, theta)

        ep = EllipticParams(tau=_complex(p["tau"], "tau"), eta=_complex(p["eta"], "eta"), c=p["c"], N=p["N"])
        tol = p["tolerance"]
        dybe = max(dybe_residual(lam, u, v, ep) for lam, _, u, v in
                   (sample_generic_point(rng, ep) for _ in range(p["points"])))
        rll = max(rll_residual(lam, mu, u, v, ep) for lam, mu, u, v in
                  (sample_generic_point(rng, ep, with_mu=True) for _ in range(max(1, p["points"] // 4))))
        quasi = 0.0
        for u in rng.uniform(-0.5, 0.5, 5) + 1j * rng.uniform(-0.3, 0.3, 5):
            t = theta(u, ep.tau)
            quasi = max(quasi, abs(theta(u + 1, ep.tau) + t),
                        abs(theta(u + ep.tau, ep.tau) + np.exp(-1j * np.pi * ep.tau - 2j * np.pi * u) * t))
        base = np.array([_complex(b, "base") for b in p["base"]]) if p["base"] else \
            np.linspace(0.31, -0.27, p["N"]) + 0.05j
        shape = tuple(p["window"])
        psi = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        hpsi = ruijsenaars_apply(psi, base, ep)
        rows = []
        for n, _ in lattice_points(base, shape, ep.eta):
            val = hpsi[n]
            rows.append(list(n) + [psi[n].real, psi[n].imag,
                                   None if np.isnan(val) else val.real, None if np.isnan(val) else val.imag])
        header = [f"n{i}" for i in range(p["N"])] + ["psi_re", "psi_im", "Hpsi_re", "Hpsi_im"]
        results = {"params": {"tau": [ep.tau.real, ep.tau.imag], "eta": [complex(ep.eta).real, complex(ep.eta).imag],
                              "c": ep.c, "N": ep.N},
                   "dybe_max_residual": float(dybe), "rll_max_residual": float(rll),
                   "theta_quasi_periodicity_max": float(quasi)}
        checks = [Check("dybe_max_residual", float(dybe), tol), Check("rll_max_residual", float(rll), tol),
                  Check("theta_quasi_periodicity", float(quasi), 1e-12)]
        return Outcome(results, checks, {"hamiltonian_action": (header, rows)})


# swmap -----------------------------------------------------------------------

class SwmapRunner(Runner):
    """Moser flow pushforward, gauge covariance and the order-2 gauge parameter."""

    module = "swmap"
    defaults = {"dim": 2, "theta": {"0,1": "1 + x0**2/3 + x1/5"},
                "a": ["x1**2/5 - x0/10", "x0*x1/4 + x0/5"], "lambda": "x0**2/2 + x0*x1/3 + x1",
                "points": [[0.1, 0.2], [-0.3, 0.4], [0.25, -0.15]], "eps": [1e-2, 1e-3],
                "lambda_orders": [1, 2], "dbi_draws": 0, "tolerance": 1e-5}

    def _fields(self, p):
        from .swmap import PolyField

        try:
            theta = PolyField.parse(p["dim"], p["theta"], "bivector")
            a = PolyField.parse(p["dim"], p["a"], "one_form")
            lam = PolyField.parse(p["dim"], p["lambda"], "function")
        except (ValueError, TypeError, SyntaxError) as exc:
            raise ValidationError(f"cannot parse fields: {exc}") from exc
        return theta, a, lam

    def check(self, p):
        from .swmap import MAX_LAMBDA_ORDER, is_poisson

        if not 2 <= p["dim"] <= 4:
            raise ValidationError("dim must be 2, 3 or 4")
        theta, _, _ = self._fields(p)
        if not is_poisson(theta):
            raise ValidationError("theta is not a Poisson bivector")
        pts = np.asarray(p["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != p["dim"] or len(pts) == 0:
            raise ValidationError("points must be a nonempty list of dim-vectors")
        if len(p["eps"]) < 2 or any(not isinstance(e, (int, float)) or e <= 0 for e in p["eps"]):
            raise ValidationError("eps needs at least two positive values")
        if any(o not in range(MAX_LAMBDA_ORDER + 1) for o in p["lambda_orders"]):
            raise ValidationError(f"lambda_orders must lie in 0..{MAX_LAMBDA_ORDER}")

    def run(self, p, rng):
        import sympy as sp

        from .swmap import (dbi_identity_residual, gauge_covariance_residual, lambda_tilde, lambda_tilde_display,
                            pushforward_residual, random_dbi_draw, scaling_exponent)

        theta, a, lam = self._fields(p)
        pts = np.asarray(p["points"], dtype=float)
        push = pushforward_residual(theta, a, pts)
        eps = [float(e) for e in p["eps"]]
        gauge = [gauge_covariance_residual(theta, a, lam, e, pts) for e in eps]
        expo = scaling_exponent(eps, gauge)
        results = {"pushforward_residual": push, "gauge_residuals": gauge, "gauge_exponent": expo,
                   "lambda_tilde": {str(o): str(sp.expand(lambda_tilde(theta, a, lam, o).scalar()))
                                    for o in p["lambda_orders"]}}
        checks = [Check("pushforward_residual", push, p["tolerance"]),
                  Check("gauge_covariance_exponent", expo, 1.9, ">=")]
        if 2 in p["lambda_orders"]:
            diff = sp.expand(lambda_tilde(theta, a, lam, 2).scalar() - lambda_tilde_display(theta, a, lam).scalar())
            results["lambda_tilde_order2_difference"] = str(diff)
            checks.append(Check("lambda_tilde order-2 identity (nonzero terms)", len(sp.Add.make_args(diff))
                                if diff != 0 else 0, 0, "=="))
        if p["dbi_draws"]:
            worst = max(dbi_identity_residual(*random_dbi_draw(rng)) for _ in range(p["dbi_draws"]))
            results["dbi_max_residual"] = worst
            checks.append(Check("dbi_max_residual", worst, 1e-10))
        return Outcome(results, checks)


RUNNERS = {r.module: r for r in (SpinalgRunner(), FrustrationRunner(), WehrlRunner(), HubbardRunner(),
                                 LaxRunner(), EllipticRunner(), SwmapRunner())}


# built-in scenarios ------------------------------------------------------------

BUILTIN_SCENARIOS = {
    "single-box": {"module": "spinalg", "seed": 0,
                   "params": {"spins": [0.5] * 4, "expected_degeneracy": 2}},
    "kls-trace": {"module": "spinalg", "seed": 1,
                  "params": {"spins": [0.5, 0.5], "kls_instances": 200, "kls_max_dim": 16}},
    "checkerboard-2x2": {"module": "frustration", "seed": 0,
                         "params": {"Lx": 2, "Ly": 2, "periodic": True, "s": 0.5, "expected_degeneracy": 2}},
    "checkerboard-2x4": {"module": "frustration", "seed": 0,
                         "params": {"Lx": 2, "Ly": 4, "periodic": True, "s": 0.5}},
    "checkerboard-2x4-field": {"module": "frustration", "seed": 0,
                               "params": {"Lx": 2, "Ly": 4, "periodic": True, "s": 0.5, "susceptibility": True,
                                          "betas": [0.5, 1.0, 2.0]}},
    "wehrl-coherent-j1": {"module": "wehrl", "seed": 0,
                          "params": {"task": "coherent", "spins": [1.0]}},
    "wehrl-random-states": {"module": "wehrl", "seed": 3,
                            "params": {"task": "random-states", "spins": [1.0, 1.5, 2.0], "n_states": 10,
                                       "tolerance": 1e-7}},
    "wehrl-spin2-scan": {"module": "wehrl", "seed": 2,
                         "params": {"task": "lieb-scan", "spins": [2.0], "n_samples": 8}},
    "hubbard-chain": {"module": "hubbard", "seed": 4, "params": {"chains": [2, 3], "draws": 10}},
    "lax-factorization": {"module": "laxflow", "seed": 5, "params": {"n": 3, "k": 2, "systems": 3}},
    "lax-chevalley": {"module": "laxflow", "seed": 6, "params": {"n": 3, "k": 2, "twist": "chevalley"}},
    "elliptic-dybe": {"module": "elliptic", "seed": 7, "params": {"N": 2, "points": 20, "window": [4, 4]}},
    "swmap-2d": {"module": "swmap", "seed": 8,
                 "params": {"dim": 2, "theta": {"0,1": "1 + x0**2/3 + x1/5"},
                            "a": ["x1**2/5 - x0/10", "x0*x1/4 + x0/5"], "lambda": "x0**2/2 + x0*x1/3 + x1",
                            "dbi_draws": 10}},
}
