"""Reference error tables for the benchmark presets.

Keys are (k,) for the linear tables and (alpha, k) for the nonlinear one;
entry m (or l) of each list is e_m^N, and ``INNER`` holds the inner
iteration counts for l = 1..3.
"""

HEAT = {  # example 1: T = 0.5, N = 100, h = 1/1000, kappa = 0.5
    1: [1.20e-01, 4.88e-04, 1.98e-06, 8.05e-09, 2.81e-11, 4.76e-12],
    2: [1.20e-01, 4.43e-04, 1.59e-06, 5.72e-09, 2.37e-11, 3.09e-12],
    3: [1.20e-01, 4.44e-04, 1.60e-06, 5.79e-09, 1.98e-11, 1.11e-12],
    4: [1.20e-01, 4.44e-04, 1.60e-06, 5.79e-09, 1.74e-11, 3.54e-12],
    5: [1.20e-01, 4.44e-04, 1.60e-06, 5.79e-09, 1.92e-11, 1.81e-12],
    6: [1.20e-01, 4.44e-04, 1.60e-06, 5.78e-09, 1.99e-11, 1.10e-12],
}

SUBDIFFUSION = {  # example 2: T = 0.1, alpha = 0.5, N = 100, h = 1/1000, kappa = 0.1
    1: [2.46e-01, 6.31e-04, 2.88e-06, 1.34e-08, 8.12e-11, 1.88e-11],
    2: [2.46e-01, 6.28e-04, 2.85e-06, 1.32e-08, 4.79e-11, 8.47e-12],
    3: [2.46e-01, 6.28e-04, 2.85e-06, 1.32e-08, 4.98e-11, 1.86e-11],
    4: [2.46e-01, 6.28e-04, 2.84e-06, 1.32e-08, 8.31e-11, 1.61e-11],
    5: [2.46e-01, 6.28e-04, 2.85e-06, 1.33e-08, 4.27e-11, 3.44e-11],
    6: [2.46e-01, 6.28e-04, 2.85e-06, 1.31e-08, 1.37e-10, 1.50e-10],
}

ALLEN_CAHN = {  # example 4: T = 0.4, N = 100, h = 1/1000, kappa = 0.1, eps = 1
    (0.25, 1): [6.30e-02, 9.27e-06, 3.64e-09, 1.42e-12],
    (0.25, 2): [6.30e-02, 9.27e-06, 3.63e-09, 1.42e-12],
    (0.75, 1): [5.94e-02, 6.83e-06, 1.95e-09, 5.23e-13],
    (0.75, 2): [5.94e-02, 6.80e-06, 1.92e-09, 5.06e-13],
    (0.75, 3): [5.94e-02, 6.80e-06, 1.92e-09, 5.03e-13],
}

INNER = {key: [5, 4, 3] for key in ALLEN_CAHN}
