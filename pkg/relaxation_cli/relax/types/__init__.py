from .report import CheckRecordDict, SampleEcho, VerificationReportDict
from .run import OutputFile, RunManifestDict, SweepFitDict
