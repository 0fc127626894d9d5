from . import coeffexpr, hlode, picone, sturmlab, utils
from .version import __version__
