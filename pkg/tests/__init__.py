from . import *

