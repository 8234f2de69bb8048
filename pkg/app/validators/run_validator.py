"""Resolution and validation of run configurations."""

import itertools
import math
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import ValidationError
from app.models.analysis_models import ModelKind
from app.models.channel_models import SideInfoChannel
from app.models.graph_models import SingleCommunityParams, SymmetricSbmParams
from app.models.requests import RunConfig
from app.services.channels import flip_channel

VARY_TO_FIELD = {"mu": "mu", "alpha": "alpha", "epsilon": "epsilon", "lambda": "lam", "k_frac": "k_frac"}


def _pydantic_messages(e: PydanticValidationError) -> List[str]:
    return [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" if err["loc"] else err["msg"]
            for err in e.errors()]


class RunValidator:
    """Turns a RunConfig into validated model parameters and channels."""

    @staticmethod
    def require(cfg: RunConfig, *names: str) -> None:
        missing = [name for name in names if getattr(cfg, name) is None]
        if missing:
            raise ValidationError(
                f"missing required parameters: {', '.join(missing)}",
                details={"missing": missing, "model": cfg.model.value}
            )

    @staticmethod
    def channel(cfg: RunConfig) -> SideInfoChannel:
        RunValidator.require(cfg, "alpha")
        return flip_channel(cfg.alpha, cfg.epsilon)

    @staticmethod
    def symmetric_rates(cfg: RunConfig) -> Tuple[float, float]:
        """(a, b) from (a, b), (μ, b) or (μ, a): a = b + μ√b."""
        a, b, mu = cfg.a, cfg.b, cfg.mu
        if a is not None and b is not None:
            if mu is not None and not math.isclose(mu, (a - b) / math.sqrt(b), rel_tol=1e-9, abs_tol=1e-12):
                raise ValidationError(
                    "mu is inconsistent with a and b",
                    details={"a": a, "b": b, "mu": mu, "implied_mu": (a - b) / math.sqrt(b)}
                )
            return a, b
        if mu is not None and b is not None:
            return b + mu * math.sqrt(b), b
        if mu is not None and a is not None:
            root_b = (-mu + math.sqrt(mu ** 2 + 4 * a)) / 2
            return a, root_b ** 2
        raise ValidationError(
            "the symmetric model needs (a, b), (mu, b) or (mu, a)",
            details={"a": a, "b": b, "mu": mu}
        )

    @staticmethod
    def symmetric_params(cfg: RunConfig) -> SymmetricSbmParams:
        RunValidator.require(cfg, "n")
        a, b = RunValidator.symmetric_rates(cfg)
        try:
            return SymmetricSbmParams(n=cfg.n, a=a, b=b)
        except PydanticValidationError as e:
            raise ValidationError(
                "Invalid symmetric SBM parameters",
                details={"errors": _pydantic_messages(e), "a": a, "b": b}
            ) from e

    @staticmethod
    def symmetric_mu(cfg: RunConfig) -> float:
        """μ for analysis-only commands; rates are needed only when μ is absent."""
        if cfg.mu is not None and (cfg.a is None or cfg.b is None):
            return cfg.mu
        a, b = RunValidator.symmetric_rates(cfg)
        return (a - b) / math.sqrt(b)

    @staticmethod
    def single_params(cfg: RunConfig) -> SingleCommunityParams:
        """
        Resolve (n, K, p, q). With λ given, q = λ(n−K)/(K²(ρ−1)²) from p/q,
        or ρ = 1 + √(λ(n−K)/(K²q)) from q.
        """
        RunValidator.require(cfg, "n", "k_frac")
        n = cfg.n
        k = int(round(cfg.k_frac * n))
        if not 1 <= k < n:
            raise ValidationError("K = round(k_frac·n) must lie in [1, n)", details={"k": k, "n": n})

        p, q = cfg.p, cfg.q
        if cfg.lam is not None:
            if p is not None and q is not None:
                raise ValidationError("give lambda with either q or p_over_q, not with both p and q")
            if q is not None:
                rho = 1 + math.sqrt(cfg.lam * (n - k) / (k ** 2 * q))
                p = rho * q
            elif cfg.p_over_q is not None:
                if cfg.p_over_q == 1 and cfg.lam > 0:
                    raise ValidationError("p_over_q = 1 cannot produce a positive lambda")
                q = cfg.lam * (n - k) / (k ** 2 * (cfg.p_over_q - 1) ** 2) if cfg.lam > 0 else None
                if q is None:
                    raise ValidationError("lambda = 0 with p_over_q leaves q undetermined; give q")
                p = cfg.p_over_q * q
            else:
                raise ValidationError("lambda needs either q or p_over_q")
        elif p is None or q is None:
            if q is not None and cfg.p_over_q is not None:
                p = cfg.p_over_q * q
            else:
                raise ValidationError("the single model needs (p, q), (p_over_q, q) or lambda with q or p_over_q")

        try:
            return SingleCommunityParams(n=n, k=k, p=p, q=q)
        except PydanticValidationError as e:
            raise ValidationError(
                "Invalid single-community parameters",
                details={"errors": _pydantic_messages(e), "p": p, "q": q}
            ) from e

    @staticmethod
    def single_lambda(cfg: RunConfig) -> Tuple[float, float]:
        """(λ, K/n) for analysis-only commands."""
        RunValidator.require(cfg, "k_frac")
        if cfg.lam is not None:
            return cfg.lam, cfg.k_frac
        params = RunValidator.single_params(cfg)
        return params.lam, params.k_frac

    @staticmethod
    def parse_range(text: str) -> Tuple[float, float]:
        """``LO:HI`` with LO < HI."""
        try:
            lo_text, hi_text = text.split(":")
            lo, hi = float(lo_text), float(hi_text)
        except ValueError as e:
            raise ValidationError(f"malformed range {text!r}; expected LO:HI", details={"range": text}) from e
        if not lo < hi:
            raise ValidationError(f"range {text!r} needs LO < HI", details={"range": text})
        return lo, hi

    @staticmethod
    def parse_vary(items: List[str]) -> Dict[str, List[float]]:
        """``name=v1,v2,...`` entries into a mapping."""
        vary: Dict[str, List[float]] = {}
        for item in items:
            name, sep, values = item.partition("=")
            name = name.strip().replace("-", "_")
            if not sep or name not in VARY_TO_FIELD:
                raise ValidationError(
                    f"malformed --vary {item!r}; expected name=v1,v2 with name in {sorted(VARY_TO_FIELD)}",
                    details={"vary": item}
                )
            try:
                vary[name] = [float(v) for v in values.split(",") if v.strip()]
            except ValueError as e:
                raise ValidationError(f"non-numeric value in --vary {item!r}", details={"vary": item}) from e
            if not vary[name]:
                raise ValidationError(f"--vary {item!r} lists no values", details={"vary": item})
        return vary

    @staticmethod
    def expand_vary(cfg: RunConfig) -> List[RunConfig]:
        """One RunConfig per combination of the varied values, in the given order."""
        if not cfg.vary:
            return [cfg]
        names = list(cfg.vary)
        combos = []
        for values in itertools.product(*(cfg.vary[name] for name in names)):
            update = {VARY_TO_FIELD[name]: value for name, value in zip(names, values)}
            try:
                combos.append(RunConfig.model_validate({**cfg.model_dump(), **update, "vary": {}}))
            except PydanticValidationError as e:
                raise ValidationError(
                    "varied parameters produce an invalid configuration",
                    details={"errors": _pydantic_messages(e), "combination": update}
                ) from e
        return combos

    @staticmethod
    def fixed_scan_values(cfg: RunConfig) -> Dict[str, Optional[float]]:
        """Parameters held fixed during a scan, keyed by scan names."""
        if cfg.model == ModelKind.SYMMETRIC:
            mu = None
            if cfg.mu is not None or (cfg.a is not None and cfg.b is not None):
                mu = RunValidator.symmetric_mu(cfg)
            return {"mu": mu, "alpha": cfg.alpha, "epsilon": cfg.epsilon}
        return {"lambda": cfg.lam, "alpha": cfg.alpha, "epsilon": cfg.epsilon, "k_frac": cfg.k_frac}
