import sys
import time

try:
    import matplotlib.pyplot as plt
except ImportError as e:
    raise ImportError(
        "Can't import matplotlib. Run `poetry install --with benchmark`."
    ) from e

from ringspectra.builders import build_zn
from ringspectra.charpoly import charpoly_dense, charpoly_lowrank
from ringspectra.matrix import build_product_matrix

# Z_{p^e} with u = p^(e-1), the orders at which the two methods are compared.
DEFAULT_MODULI = [8, 16, 27, 32, 49, 64, 81, 125, 128, 243]


def time_method(method, matrix) -> float:
    t0 = time.perf_counter()
    method(matrix)
    return time.perf_counter() - t0


def smallest_prime_factor(m: int) -> int:
    return next(p for p in range(2, m + 1) if m % p == 0)


def benchmark(moduli: list[int]):
    orders = []
    dense_times = []
    lowrank_times = []
    for m in moduli:
        ring = build_zn(m)
        matrix = build_product_matrix(ring, m // smallest_prime_factor(m))
        orders.append(m)
        dense_times.append(time_method(charpoly_dense, matrix))
        lowrank_times.append(time_method(charpoly_lowrank, matrix))
        print(
            f"zn:{m}: dense {dense_times[-1]:.3f} s, "
            f"low-rank {lowrank_times[-1]:.3f} s",
            flush=True,
        )

    plt.plot(orders, dense_times, marker="o", label="dense")
    plt.plot(orders, lowrank_times, marker="o", label="low-rank")


def main():
    moduli = [int(arg) for arg in sys.argv[1:]] or DEFAULT_MODULI
    benchmark(moduli)

    plt.legend(loc=2)
    plt.xlabel("Ring order")
    plt.ylabel("Duration, seconds")
    plt.yscale("log")

    plt.show()


if __name__ == "__main__":
    main()
