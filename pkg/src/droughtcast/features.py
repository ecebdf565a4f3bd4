"""Canonical meteorological feature names and drought label names."""

# Column order of the source timeseries files; every array in the package
# uses this order unless a pruned subset is passed explicitly.
FEATURES = (
    "PRECTOT",
    "PS",
    "QV2M",
    "T2M",
    "T2MDEW",
    "T2MWET",
    "T2M_MAX",
    "T2M_MIN",
    "T2M_RANGE",
    "TS",
    "WS10M",
    "WS10M_MAX",
    "WS10M_MIN",
    "WS10M_RANGE",
    "WS50M",
    "WS50M_MAX",
    "WS50M_MIN",
    "WS50M_RANGE",
)

N_FEATURES = len(FEATURES)

UNITS = {
    "PRECTOT": "mm/day",
    "PS": "kPa",
    "QV2M": "g/kg",
    "T2M": "C",
    "T2MDEW": "C",
    "T2MWET": "C",
    "T2M_MAX": "C",
    "T2M_MIN": "C",
    "T2M_RANGE": "C",
    "TS": "C",
    "WS10M": "m/s",
    "WS10M_MAX": "m/s",
    "WS10M_MIN": "m/s",
    "WS10M_RANGE": "m/s",
    "WS50M": "m/s",
    "WS50M_MAX": "m/s",
    "WS50M_MIN": "m/s",
    "WS50M_RANGE": "m/s",
}

# Intensity classes: 0 is "no drought", k in 1..5 is D(k-1).
LABELS = ("0", "D0", "D1", "D2", "D3", "D4")
LABEL_DESCRIPTIONS = {
    "0": "No Drought",
    "D0": "Abnormally Dry",
    "D1": "Moderate Drought",
    "D2": "Severe Drought",
    "D3": "Extreme Drought",
    "D4": "Exceptional Drought",
}

SCORE_MIN = 0.0
SCORE_MAX = 5.0


def label_to_class(label):
    """Map a label name ("0", "D0".."D4") or class integer to the class integer."""
    if isinstance(label, str):
        key = label.strip().upper()
        if key in ("0", "NONE"):
            return 0
        if key in LABELS:
            return LABELS.index(key)
        raise ValueError(f"unknown drought label {label!r}; expected one of {LABELS}")
    value = int(label)
    if not 0 <= value < len(LABELS):
        raise ValueError(f"class index {label!r} out of range 0..{len(LABELS) - 1}")
    return value


def feature_indices(names):
    """Positions of ``names`` within :data:`FEATURES`."""
    unknown = [n for n in names if n not in FEATURES]
    if unknown:
        raise ValueError(f"unknown feature names: {unknown}")
    return [FEATURES.index(n) for n in names]
