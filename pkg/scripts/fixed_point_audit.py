"""Fixed-point bookkeeping for the preset processes.

Prints the composed truth tables of the deterministic presets under a
chosen tuple of local ops, counts fixed points across every op tuple, and
runs the unit-average audit on the mixture presets.  The perturbed mixture
is included deliberately: its audit fails and the script shows the witness.
"""
import argparse
import itertools

from fractions import Fraction

from noncausal.exact import BIT_OPS
from noncausal.fixedpoint import (
    DeterministicDecomposition,
    as_function,
    average_fixed_points,
    compose_with_ops,
    fixed_points,
    preset_decomposition,
    verify_unit_fixed_point_average,
)
from noncausal.process import check_total_probability, preset_process

DETERMINISTIC = ("identity-chain", "majority")


def mixtures():
    half = preset_decomposition("circular-mixture")
    (_, cyc), (_, flip) = half.components
    tilted = DeterministicDecomposition(
        ((Fraction(51, 100), cyc), (Fraction(49, 100), flip))
    )
    return (("circular-mixture", half), ("perturbed-mixture", tilted))


def op_tuple(csv: str):
    return tuple(BIT_OPS[n.strip()] for n in csv.split(","))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ops", default="id,id,id",
                    help="comma list from {id,not,const0,const1}, one per party")
    args = ap.parse_args()
    ops = op_tuple(args.ops)

    for name in DETERMINISTIC:
        fn = as_function(preset_process(name))
        print(f"{name} composed with ({args.ops}):")
        for t, image in compose_with_ops(fn, ops):
            mark = "  <- fixed" if t == image else ""
            print(f"  {''.join(map(str, t))} -> {''.join(map(str, image))}{mark}")
        counts: dict[int, int] = {}
        for tup in itertools.product(BIT_OPS.values(), repeat=len(fn.out_sizes)):
            k = len(fixed_points(fn, tup))
            counts[k] = counts.get(k, 0) + 1
        print(f"  fixed-point counts over all op tuples: {counts}")
        print()

    for name, d in mixtures():
        report = verify_unit_fixed_point_average(d)
        print(f"{name}: unit-average audit {'passed' if report.ok else 'FAILED'}")
        if report.ok:
            print(f"  average under ({args.ops}): {average_fixed_points(d, ops)}")
        else:
            bad = check_total_probability(preset_process(name))
            names = {op: label for label, op in BIT_OPS.items()}
            print(f"  witness ops: {tuple(names[op] for op in report.ops)}")
            print(f"  total probability there: {bad.trace}")
        print()


if __name__ == "__main__":
    main()
