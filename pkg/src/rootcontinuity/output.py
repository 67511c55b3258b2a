import abc
import json
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from rootcontinuity.fuzz import FuzzReport, TrialOutcome


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2)


class FuzzReportOutput(abc.ABC):
    @abc.abstractmethod
    def render(self, report: "FuzzReport") -> str:
        pass


class JSONFuzzReportOutput(FuzzReportOutput):
    def render(self, report: "FuzzReport") -> str:
        return dump_json(report.to_json())


class CSVFuzzReportOutput(FuzzReportOutput):
    """One `;`-separated row per trial, ready for a spreadsheet."""

    def header(self) -> str:
        return "trial;violation;margin;displacement;counts"

    def data_row(self, outcome: "TrialOutcome") -> str:
        counts = ""
        if outcome.counts is not None:
            counts = ",".join(str(c) for c in outcome.counts)
        return "%s;%s;%r;%r;%s" % (
            outcome.trial,
            int(outcome.violation),
            outcome.margin,
            outcome.displacement,
            counts,
        )

    def render(self, report: "FuzzReport") -> str:
        rows = [self.header()]
        rows.extend(self.data_row(outcome) for outcome in report.outcomes)
        return "\n".join(rows)
