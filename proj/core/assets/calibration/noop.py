"""Calibration workload: invokes the instrumented no-op N//2 times, where N
is the requested checkpoint (marker) count passed as argv[1]."""
import sys


def noop():
    pass


def main():
    markers = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    for _ in range(markers // 2):
        noop()


if __name__ == "__main__":
    main()
