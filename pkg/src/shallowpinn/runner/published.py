"""Published relative errors and run times for the shipped configurations.

Used only for side-by-side columns in ``report``; never asserted. Times were
measured on different hardware.
"""

# (mode, problem, activation) -> (per-component relative L2 errors, seconds)
PUBLISHED = {
    ("pidd", "harmonic", "sigmoid"): ((5.67e-5, 6.82e-4), 0.0020),
    ("pidd", "harmonic", "resigma"): ((3.88e-6, 2.63e-6), 0.0017),
    ("pidd", "slingshot", "sigmoid"): ((1.88e-5, 1.92e-5, 3.48e-5, 3.43e-5), 0.004),
    ("pidd", "slingshot", "resigma"): ((4.80e-7, 3.57e-7, 2.52e-6, 2.70e-6), 0.004),
    ("pidd", "lorenz", "sigmoid"): ((5.52e-5, 3.07e-4, 4.27e-5), 0.0026),
    ("pidd", "lorenz", "resigma"): ((5.14e-6, 8.10e-6, 3.03e-6), 0.0025),
    ("nbn", "harmonic", "sigmoid"): ((3.35e-5, 3.17e-5), 302.0),
    ("nbn", "harmonic", "resigma"): ((3.35e-6, 3.30e-6), 254.0),
    ("nbn", "slingshot", "sigmoid"): ((6.40e-5, 5.19e-5, 5.44e-5, 6.08e-5), 982.0),
    ("nbn", "slingshot", "resigma"): ((5.79e-6, 4.18e-6, 5.16e-7, 3.16e-7), 903.0),
    ("nbn", "lorenz", "sigmoid"): ((3.47e-3, 5.04e-3, 2.12e-3), 1077.0),
    ("nbn", "lorenz", "resigma"): ((2.63e-3, 3.83e-3, 1.62e-3), 888.0),
}


def published_for(mode: str, problem: str, activation: str):
    return PUBLISHED.get((mode, problem, activation))
