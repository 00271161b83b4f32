"""Run configuration: one serializable object drives the whole pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from groundcheck.errors import ConfigurationError
from groundcheck.imaging.variants import BlendWeights, NrMode
from groundcheck.scoring import PremiseMode

_POLICY_CHOICES = ("oracle", "route", "both")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; embedded verbatim in its summary for provenance."""

    manifest: Path
    out_dir: Path
    cache_dir: Path
    limit: int | None = None
    kernel_size: int = 15
    nr_mode: NrMode = NrMode.PURE_MEDIAN
    blend: BlendWeights = field(default_factory=BlendWeights)
    sample_count: int = 3
    premise_mode: PremiseMode = PremiseMode.REFERENCE
    responder: str = "mock"  # "mock" or an HTTP endpoint URL
    nli: str = "stub"  # "stub" or an HTTP endpoint URL
    policy: str = "oracle"  # oracle | route | both
    concurrency: int = 4
    seed: int = 0
    strict: bool = False
    model_id: str = "gpt-3.5"
    temperature: float = 0.7
    responder_fixture: Path | None = None
    nli_table: Path | None = None
    responder_api_key: str | None = None
    nli_model_id: str = "default"

    def __post_init__(self):
        object.__setattr__(self, "manifest", Path(self.manifest))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        object.__setattr__(self, "cache_dir", Path(self.cache_dir))
        if self.responder_fixture is not None:
            object.__setattr__(self, "responder_fixture", Path(self.responder_fixture))
        if self.nli_table is not None:
            object.__setattr__(self, "nli_table", Path(self.nli_table))

    def validate(self) -> None:
        if not self.manifest.is_file():
            raise ConfigurationError(f"manifest not found: {self.manifest}")
        if self.limit is not None and self.limit < 1:
            raise ConfigurationError(f"limit must be >= 1, got {self.limit}")
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise ConfigurationError(
                f"kernel_size must be an odd integer >= 3, got {self.kernel_size}"
            )
        if self.sample_count < 1:
            raise ConfigurationError(f"sample_count must be >= 1, got {self.sample_count}")
        if self.policy not in _POLICY_CHOICES:
            raise ConfigurationError(
                f"policy must be one of {_POLICY_CHOICES}, got {self.policy!r}"
            )
        if self.concurrency < 1:
            raise ConfigurationError(f"concurrency must be >= 1, got {self.concurrency}")
        if self.temperature < 0:
            raise ConfigurationError(f"temperature must be >= 0, got {self.temperature}")
        if self.responder_fixture is not None and not self.responder_fixture.is_file():
            raise ConfigurationError(
                f"responder fixture not found: {self.responder_fixture}"
            )
        if self.nli_table is not None and not self.nli_table.is_file():
            raise ConfigurationError(f"NLI stub table not found: {self.nli_table}")

    def to_dict(self) -> dict:
        return {
            "manifest": str(self.manifest),
            "out_dir": str(self.out_dir),
            "cache_dir": str(self.cache_dir),
            "limit": self.limit,
            "kernel_size": self.kernel_size,
            "nr_mode": self.nr_mode.value,
            "blend": {
                "alpha": self.blend.alpha,
                "beta": self.blend.beta,
                "gamma": self.blend.gamma,
            },
            "sample_count": self.sample_count,
            "premise_mode": self.premise_mode.value,
            "responder": self.responder,
            "nli": self.nli,
            "policy": self.policy,
            "concurrency": self.concurrency,
            "seed": self.seed,
            "strict": self.strict,
            "model_id": self.model_id,
            "temperature": self.temperature,
            "responder_fixture": (
                str(self.responder_fixture) if self.responder_fixture else None
            ),
            "nli_table": str(self.nli_table) if self.nli_table else None,
            "nli_model_id": self.nli_model_id,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        blend = raw.get("blend") or {}
        return cls(
            manifest=Path(raw["manifest"]),
            out_dir=Path(raw["out_dir"]),
            cache_dir=Path(raw["cache_dir"]),
            limit=raw.get("limit"),
            kernel_size=raw.get("kernel_size", 15),
            nr_mode=NrMode(raw.get("nr_mode", "pure")),
            blend=BlendWeights(
                alpha=blend.get("alpha", 1.5),
                beta=blend.get("beta", -0.5),
                gamma=blend.get("gamma", 0.0),
            ),
            sample_count=raw.get("sample_count", 3),
            premise_mode=PremiseMode(raw.get("premise_mode", "reference")),
            responder=raw.get("responder", "mock"),
            nli=raw.get("nli", "stub"),
            policy=raw.get("policy", "oracle"),
            concurrency=raw.get("concurrency", 4),
            seed=raw.get("seed", 0),
            strict=raw.get("strict", False),
            model_id=raw.get("model_id", "gpt-3.5"),
            temperature=raw.get("temperature", 0.7),
            responder_fixture=(
                Path(raw["responder_fixture"]) if raw.get("responder_fixture") else None
            ),
            nli_table=Path(raw["nli_table"]) if raw.get("nli_table") else None,
            nli_model_id=raw.get("nli_model_id", "default"),
        )

    @property
    def policies(self) -> tuple[str, ...]:
        if self.policy == "both":
            return ("oracle", "route")
        return (self.policy,)
