from .text import TextExporter
from .json import JSONExporter
