"""The five disease dataset schemas: ordered feature lists, target classes,
and the categorical encodings used to turn raw CSV cells into numbers.

Feature names are canonical and order-sensitive. CSV ingestion matches
headers case-insensitively with spaces/underscores ignored, plus a few
aliases for the common public-dataset spellings.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class UnknownDisease(KeyError):
    pass


class SchemaMismatch(ValueError):
    pass


# Identifier fields that must never survive de-identification.
IDENTIFIER_FIELDS = frozenset(
    {"name", "phone", "aadhar", "email", "address", "location", "medical_history"}
)


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    categories: dict[str, int] | None = None  # None = numeric passthrough

    @property
    def is_categorical(self) -> bool:
        return self.categories is not None


@dataclass(frozen=True)
class DatasetSchema:
    disease: str
    features: tuple[FeatureSpec, ...]
    target_classes: tuple[str, ...]
    target_aliases: dict[str, str] = field(default_factory=dict)
    drop_columns: tuple[str, ...] = ()

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def class_index(self, label: str) -> int:
        return self.target_classes.index(label)


def normalize_name(name: str) -> str:
    return "".join(ch for ch in name.strip().lower() if ch.isalnum())


_YES_NO = {"no": 0, "yes": 1}
_NORMAL = {"normal": 0, "abnormal": 1}
_PRESENT = {"notpresent": 0, "present": 1}


def _num(*names: str) -> list[FeatureSpec]:
    return [FeatureSpec(n) for n in names]


HEART = DatasetSchema(
    disease="Heart",
    features=tuple(_num(
        "age", "anaemia", "creatinine_phosphokinase", "diabetes", "ejection_fraction",
        "high_blood_pressure", "platelets", "serum_creatinine", "serum_sodium",
        "sex", "smoking", "time",
    )),
    target_classes=("Low", "High"),
    target_aliases={"0": "Low", "1": "High", "low": "Low", "high": "High"},
)

LUNG_CANCER = DatasetSchema(
    disease="LungCancer",
    features=(
        FeatureSpec("gender", categories={"m": 1, "f": 0, "male": 1, "female": 0}),
        *_num(
            "age", "smoking", "yellow_fingers", "anxiety", "peer_pressure",
            "chronic_disease", "fatigue", "allergy", "wheezing", "alcohol_consuming",
            "coughing", "shortness_of_breath", "swallowing_difficulty", "chest_pain",
        ),
    ),
    target_classes=("Low", "High"),
    target_aliases={"no": "Low", "yes": "High", "1": "Low", "2": "High",
                    "low": "Low", "high": "High"},
)

MATERNAL_HEALTH = DatasetSchema(
    disease="MaternalHealth",
    features=tuple(_num("Age", "SystolicBP", "DiastolicBP", "BS", "BodyTemp", "Heart Rate")),
    target_classes=("Low", "Mid", "High"),
    target_aliases={"low risk": "Low", "mid risk": "Mid", "high risk": "High",
                    "low": "Low", "mid": "Mid", "high": "High"},
)

KIDNEY = DatasetSchema(
    disease="Kidney",
    features=(
        *_num("age", "bp", "sg", "al", "su"),
        FeatureSpec("rbc", categories=_NORMAL),
        FeatureSpec("pc", categories=_NORMAL),
        FeatureSpec("pcc", categories=_PRESENT),
        FeatureSpec("ba", categories=_PRESENT),
        *_num("bgr", "bu", "sc", "sod", "pot", "hemo", "pcv", "wc", "rc"),
        FeatureSpec("htn", categories=_YES_NO),
        FeatureSpec("dm", categories=_YES_NO),
        FeatureSpec("cad", categories=_YES_NO),
        FeatureSpec("appet", categories={"good": 0, "poor": 1}),
        FeatureSpec("pe", categories=_YES_NO),
        FeatureSpec("ane", categories=_YES_NO),
    ),
    target_classes=("CKD", "NotCKD"),
    target_aliases={"ckd": "CKD", "notckd": "NotCKD", "1": "CKD", "0": "NotCKD"},
    drop_columns=("id",),  # row identifier in the source table, not a feature
)

DIABETES = DatasetSchema(
    disease="Diabetes",
    features=tuple(_num(
        "Pregnancies", "Glucose", "BloodPressure", "SkinThickness", "Insulin",
        "BMI", "Diabetes Pedegree Function", "Age",
    )),
    target_classes=("Diabetic", "Not"),
    target_aliases={"1": "Diabetic", "0": "Not", "diabetic": "Diabetic", "not": "Not"},
)

SCHEMAS: dict[str, DatasetSchema] = {
    s.disease.lower(): s for s in (HEART, LUNG_CANCER, MATERNAL_HEALTH, KIDNEY, DIABETES)
}

# Common public-CSV header spellings mapped onto the canonical names.
HEADER_ALIASES: dict[str, str] = {
    "diabetespedigreefunction": "diabetespedegreefunction",
    "heartrate": "heartrate",  # canonical "Heart Rate" normalizes to the same
}


def get_schema(disease: str) -> DatasetSchema:
    try:
        return SCHEMAS[normalize_name(disease)]
    except KeyError:
        raise UnknownDisease(disease) from None


def resolve_header(schema: DatasetSchema, header: str) -> str | None:
    """Map one CSV header to a canonical feature name, or None."""
    norm = normalize_name(header)
    norm = HEADER_ALIASES.get(norm, norm)
    for f in schema.features:
        if normalize_name(f.name) == norm:
            return f.name
    return None
