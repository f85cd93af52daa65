import sys

from tdoa_toolkit.cli.main import main

sys.exit(main())
