"""
Pytest configuration file for opseq tests.

This file contains common fixtures and settings for the test suite.
"""

import os
import sys
import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

# Import project components for fixtures
from opseq.codecs.absolute import AbsoluteCodec
from opseq.codecs.relative import RelativeCodec
from opseq.core.types import AlignedSentencePair
from opseq.engine.generator import RandomPairGenerator


# Worked streams: "a b" translated as "y x" (swap), and "a b" as "x y" (monotone)
SWAP_REL = "a [SM] x [EOP] b [JB] y [EOP] [EOS]"
SWAP_ABS = "a [BL] x [2] b [BL] y [1] [EOS]"
MONOTONE_REL = "a [NO_OPS] x [EOP] b [NO_OPS] y [EOP] [EOS]"
MONOTONE_ABS = "a [BL] x [1] b [BL] y [2] [EOS]"


@pytest.fixture
def abs_codec():
    """Return an absolute codec with the default position limit."""
    return AbsoluteCodec()


@pytest.fixture
def rel_codec():
    """Return a relative codec with the lazy marker policy."""
    return RelativeCodec()


@pytest.fixture
def swap_pair():
    """Return the two-word pair whose targets are swapped."""
    return AlignedSentencePair.from_text("a b", "y x", {(1, 2), (2, 1)})


@pytest.fixture
def monotone_pair():
    """Return the two-word pair aligned one-to-one in order."""
    return AlignedSentencePair.from_text("a b", "x y", {(1, 1), (2, 2)})


@pytest.fixture
def rotation_pair():
    """Return a three-word pair whose targets are rotated (a->2, b->3, c->1)."""
    return AlignedSentencePair.from_text("a b c", "z x y", {(1, 2), (2, 3), (3, 1)})


@pytest.fixture
def generator():
    """Return a random pair generator with a fixed seed for reproducibility."""
    return RandomPairGenerator(seed=42)


@pytest.fixture
def toy_corpus(tmp_path):
    """Write a three-line aligned toy corpus and return its (src, tgt, align) paths."""
    src = tmp_path / "toy.src"
    tgt = tmp_path / "toy.tgt"
    align = tmp_path / "toy.align"
    src.write_text("a b\nthe house\nc d e\n", encoding="utf-8")
    tgt.write_text("y x\ndas haus\nv w\n", encoding="utf-8")
    align.write_text("0-1 1-0\n0-0 1-1\n0-0 2-1\n", encoding="utf-8")
    return src, tgt, align
