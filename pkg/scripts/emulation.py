"""Ten-coin game via helper atoms: exact rational frequencies."""
from _common import load
from prasp.inference import InferenceConfig, emulation_frequency, prepare
from prasp.syntax import parse_formula

QUERIES = ["win", "not win", "coin_out(1,heads)", "coin_out(2,heads)"]


def main():
    gwp = load("coin10.prasp")
    cfg = InferenceConfig(mode="emulation")
    print(f"{prepare(gwp, cfg).world_count} answer sets")
    for q in QUERIES:
        f = emulation_frequency(gwp, parse_formula(q), cfg)
        print(f"{q:>20}: {f} = {float(f)!r}")


if __name__ == "__main__":
    main()
