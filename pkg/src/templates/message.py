"""Templates for messages"""
NON_FINITE_ARGUMENT = "Argument must be finite, got {value}"
INVALID_YOUNG_FUNCTION = "Invalid Young function {family}: {reason}"
UNKNOWN_PHI_FAMILY = "Unknown Young function family '{family}'"
BAD_PHI_SPEC = "Cannot parse Young function spec '{text}': {reason}"
BRACKET_OVERFLOW = "Conjugate bracket exceeded {limit:g} at s={s:g}; φ looks sublinear"
NORM_NON_CONVERGENCE = "Luxemburg bisection did not converge within {steps} steps"
NORM_BRACKET_FAILED = "Cannot bracket the Luxemburg norm; the modular never crosses 1"
DESCENT_NON_CONVERGENCE = "Descent stopped after {iterations} iterations without converging ({reason})"
SIZE_LIMIT = "{what} would need {size} entries, above the cap {cap}"
PARSE_ERROR = "Line {line}, field {field}: {reason}"
WEIGHTS_NOT_POSITIVE = "Weights must be positive, point {index} has {value}"
METRIC_NOT_SYMMETRIC = "Distance matrix is not symmetric at ({i}, {j})"
METRIC_BAD_DIAGONAL = "Distance d({i}, {i}) = {value}, expected 0"
METRIC_NEGATIVE = "Negative distance at ({i}, {j})"
METRIC_TRIANGLE = "Triangle inequality fails for ({i}, {j}, {k}): {lhs} > {rhs}"
EMPTY_BALL = "Ball of radius {r} around point {index} has zero measure"
BAD_DEGREE = "Degree must be a nonnegative integer, got {degree}"
BAD_SCALE = "Scale must be nonnegative, got {scale}"
SHAPE_MISMATCH = "Cochain of degree {degree} on {n} points needs shape {expected}, got {got}"
SPACE_MISMATCH = "Operands live on different spaces"
KERNEL_NEGATIVE = "Kernel has a negative entry"
KERNEL_ROW_MASS = "Kernel row {row} has mass {mass}, expected 1"
KERNEL_SUPPORT = "Kernel is nonzero at ({i}, {j}) beyond radius {radius}"
QI_BAD_MAP = "Point map must send {n} source points into {m} target points"
QI_DISTORTION = "Map violates the {lam}-bilipschitz-up-to-{eps} bound at ({i}, {j})"
QI_NOT_DENSE = "Target point {index} is farther than {eps} from the image"
QI_COMPOSE_MISMATCH = "Quasi-inverse must map the target back to the source"
NOT_A_COCYCLE = "Not a cocycle: defect {violation} at triple {triple}"
SCALE_TOO_SMALL = "Scale {t} is not above the threshold t0 = {t0}"
TRUNCATION_TOO_SMALL = "Radius {radius} must be at least {needed}"
BOUNDARY_VIOLATION = "Function must vanish on the boundary layer, vertex {vertex} has {value}"
DEGENERATE_PROBLEM = "Dirichlet problem is degenerate: {reason}"
INVALID_PARAMETER = "Invalid parameter {name}={value}: {reason}"
UNKNOWN_REPRO = "Unknown reproduction '{name}'"
RUN_NOT_FOUND = "Run not found"
