from . import test_bspline
from . import test_cli
from . import test_config
from . import test_env
from . import test_fscad
from . import test_irls
from . import test_kernelw
from . import test_linkfam
from . import test_logger
from . import test_longdata
from . import test_pylocker
from . import test_simbench
from . import test_tuning
from . import test_utils
