from . import (classes, extract, transform, workspace)
