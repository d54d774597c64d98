"""
Metrics — accuracy, per-class precision/recall/F1 and macro-F1 over the
five intent labels.

All five labels always count towards the macro average; a label with no
gold and no predicted messages scores F1 = 0.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping

from sklearn.metrics import confusion_matrix, f1_score, precision_recall_fscore_support

from backend.errors import EvaluationError
from pipeline.intent.dataset import LABELS, IntentLabel


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    macro_f1: float
    confusion: List[List[int]]
    per_class: Dict[str, ClassScore]
    total: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "total": self.total,
            "labels": list(LABELS),
            "confusion": self.confusion,
            "per_class": {
                label: {"precision": s.precision, "recall": s.recall, "f1": s.f1, "support": s.support}
                for label, s in self.per_class.items()
            },
        }


def _value(label) -> str:
    return label.value if isinstance(label, IntentLabel) else str(label)


def evaluate(predictions: Mapping[str, Any], gold: Mapping[str, Any]) -> EvalReport:
    """
    Score predictions against gold labels, both keyed by message id.

    Confusion rows are gold labels, columns predictions, in LABELS order.
    """
    if set(predictions) != set(gold):
        missing = sorted(set(gold) - set(predictions))[:5]
        extra = sorted(set(predictions) - set(gold))[:5]
        raise EvaluationError(f"prediction ids do not match gold ids (missing {missing}, unexpected {extra})")
    if not gold:
        raise EvaluationError("nothing to evaluate")

    ids = sorted(gold)
    y_true = [_value(gold[i]) for i in ids]
    y_pred = [_value(predictions[i]) for i in ids]
    unknown = sorted(set(y_true + y_pred) - set(LABELS))
    if unknown:
        raise EvaluationError(f"unknown labels: {unknown}")

    matrix = confusion_matrix(y_true, y_pred, labels=list(LABELS))
    total = int(matrix.sum())
    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels=list(LABELS), zero_division=0
    )
    macro = f1_score(y_true, y_pred, labels=list(LABELS), average="macro", zero_division=0)

    return EvalReport(
        accuracy=float(matrix.trace()) / total,
        macro_f1=float(macro),
        confusion=matrix.tolist(),
        per_class={
            label: ClassScore(float(precision[k]), float(recall[k]), float(f1[k]), int(support[k]))
            for k, label in enumerate(LABELS)
        },
        total=total,
    )
