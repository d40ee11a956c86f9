from pathlib import Path

from prasp.grounding import ground
from prasp.syntax import parse_program

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def load(name):
    return ground(parse_program((FIXTURES / name).read_text()))
