"""Exception types raised across the package.

Two branches decide the CLI exit status: ValidationError (2) for inputs or
frames that cannot be used, NumericError (3) for divergence and broken
numerics.
"""


class WaveSSMError(Exception):
    exit_code = 1


class ValidationError(WaveSSMError):
    exit_code = 2


class NumericError(WaveSSMError):
    exit_code = 3


class RankDeficient(ValidationError):
    def __init__(self, lambda_min, lambda_max):
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max
        super().__init__(
            f"frame operator is rank deficient: lambda_min={lambda_min:.3e}, "
            f"lambda_max={lambda_max:.3e}"
        )


class NotPSD(ValidationError):
    def __init__(self, lambda_min):
        self.lambda_min = lambda_min
        super().__init__(f"matrix is not positive semidefinite: lambda_min={lambda_min:.3e}")


class DegenerateAtom(ValidationError):
    def __init__(self, energy):
        self.energy = energy
        super().__init__(f"atom energy {energy:.3e} below 1e-14, it fell off the grid")


class FilterInvalid(ValidationError):
    pass


class Unresolvable(ValidationError):
    def __init__(self, f_min, ceiling):
        self.ceiling = ceiling
        super().__init__(f"f_min={f_min:g} is above the finest pseudo-frequency the grid resolves ({ceiling:.4g})")


class BadLength(ValidationError):
    pass


class ZeroError(ValidationError):
    def __init__(self, budget):
        self.budget = budget
        super().__init__(f"exact at budget N={budget}")


class Infeasible(ValidationError):
    pass


class ChecksumMismatch(ValidationError):
    def __init__(self, name, expected, actual):
        self.name = name
        super().__init__(f"{name}: checksum {actual} does not match manifest {expected}")


class SchemaError(ValidationError):
    def __init__(self, keys, what="manifest"):
        self.keys = sorted(keys)
        super().__init__(f"unknown {what} field(s): {', '.join(self.keys)}")


class ConfigError(SchemaError):
    def __init__(self, keys):
        super().__init__(keys, what="config")


class NoConvergence(NumericError):
    pass


class BoundViolated(NumericError):
    def __init__(self, norm, bound):
        self.norm = norm
        self.bound = bound
        super().__init__(f"projection norm {norm:.6e} exceeds conditioning bound {bound:.6e}")


class Singular(NumericError):
    pass


class Overflow(NumericError):
    def __init__(self, step):
        self.step = step
        super().__init__(f"state magnitude exceeded 1e12 at step {step}")
