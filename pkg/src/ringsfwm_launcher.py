"""Console-script shim: applies the RINGSFWM_THREADS cap to the BLAS and
OpenMP thread environment variables before numpy is imported, then defers
to the real CLI.  Kept outside the package so importing it cannot trigger
the package's numpy import first.
"""

import os


def main() -> int:
    threads = os.environ.get("RINGSFWM_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    from ringsfwm.cli import main as cli_main
    return cli_main()


if __name__ == "__main__":
    raise SystemExit(main())
