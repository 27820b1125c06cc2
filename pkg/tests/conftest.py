import pytest

from hangrep import parse_stream


def parse_one(text: str):
    """Parse exactly one tree from ``text``, failing the test otherwise."""
    trees, diagnostics = parse_stream(text)
    assert not diagnostics, f"unexpected diagnostics for {text!r}: {diagnostics}"
    assert len(trees) == 1, f"expected one tree from {text!r}, got {len(trees)}"
    return trees[0]


@pytest.fixture
def knot():
    """The worked example: 結 is 糸 beside 吉, and 吉 is 士 over 口."""
    return parse_one("<結>⿰糸<吉>⿱士口")
