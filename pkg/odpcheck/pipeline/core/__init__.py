from .config import CliConfig, Command, ReportFormat
from .context import InputResult, RunContext, StageStats
from .artifacts import ArtifactStore
from .progress import ProgressReporter, RichProgressReporter, NoopProgressReporter
from .executor_provider import ExecutorProvider
from .resolver import ModelResolver
