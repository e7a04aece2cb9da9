"""Re-solves the MPS files written by mps_crosscheck with HiGHS and compares
objectives to 1e-6 (relative)."""

import glob
import os
import sys

import highspy


def main(directory):
    files = sorted(glob.glob(os.path.join(directory, "lp*.mps")))
    if not files:
        print("no MPS files")
        return 1
    bad = 0
    for path in files:
        ours = float(open(path[:-4] + ".obj").read())
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.readModel(path)
        h.run()
        status = h.modelStatusToString(h.getModelStatus())
        theirs = h.getInfo().objective_function_value
        rel = abs(ours - theirs) / max(1.0, abs(theirs))
        ok = status == "Optimal" and rel <= 1e-6
        bad += not ok
        print(f"{os.path.basename(path)} ours={ours:.9f} highs={theirs:.9f} "
              f"status={status} {'ok' if ok else 'MISMATCH'}")
    print(f"{len(files) - bad}/{len(files)} agree")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
