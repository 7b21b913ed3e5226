from . import combine
from . import ingest
from . import profile
from . import spike
from . import synth
from . import test
