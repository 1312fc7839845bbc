import os
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, FilePath, model_validator

from opseq.codecs.absolute import DEFAULT_MAX_POSITION
from opseq.codecs.base import Variant
from opseq.codecs.relative import MarkerPolicy
from opseq.engine.pipeline import CodecSettings
from opseq.ingest.filters import DEFAULT_MAX_RATIO, DEFAULT_MAX_TGT_LEN


class JobConfig(BaseModel):
    """
    Settings of one CLI job.

    Paths read by the job must exist; the corpus is given either as three
    line-aligned files (src, tgt, align) or as one tab-separated file.
    """

    model_config = ConfigDict(frozen=True, use_enum_values=False)

    variant: Variant = Variant.RELATIVE
    src: Optional[FilePath] = None
    tgt: Optional[FilePath] = None
    align: Optional[FilePath] = None
    tsv: Optional[FilePath] = None
    input: Optional[FilePath] = None
    output: Optional[Path] = None
    reference: Optional[FilePath] = None
    baseline: Optional[FilePath] = None
    timestamps: Optional[FilePath] = None
    report: Optional[Path] = None
    trace: Optional[Path] = None
    align_out: Optional[Path] = None

    max_ratio: float = Field(DEFAULT_MAX_RATIO, gt=0)
    max_tgt_len: int = Field(DEFAULT_MAX_TGT_LEN, ge=1)
    max_position: int = Field(DEFAULT_MAX_POSITION, ge=1)
    marker_policy: MarkerPolicy = MarkerPolicy.LAZY
    bins: int = Field(10, ge=1)
    seed: Optional[int] = None
    count: int = Field(1000, ge=0)
    strict: bool = False
    segmented: bool = False
    jobs: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)

    @model_validator(mode="after")
    def check_corpus_paths(self) -> "JobConfig":
        given = [p is not None for p in (self.src, self.tgt, self.align)]
        if any(given) and not all(given):
            raise ValueError("--src, --tgt and --align must be given together")
        if all(given) and self.tsv is not None:
            raise ValueError("Give either --src/--tgt/--align or --tsv, not both")
        return self

    @property
    def has_corpus(self) -> bool:
        return self.tsv is not None or self.src is not None

    def codec_settings(self) -> CodecSettings:
        return CodecSettings(
            variant=self.variant,
            max_position=self.max_position,
            marker_policy=self.marker_policy.value,
            max_ratio=self.max_ratio,
            max_tgt_len=self.max_tgt_len,
            segmented=self.segmented,
            trace=self.trace is not None,
        )
