from .parse import ParseStage
from .resolve_model import ResolveModelStage
from .check_model import CheckModelStage
from .check_system import CheckSystemStage
from .conform import ConformStage
from .engineering import EngineeringStage
from .simulate import SimulateStage
from .verify import VerifyStage
from .fmt import FmtStage
