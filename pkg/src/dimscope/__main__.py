import sys

from dimscope.cli import main

sys.exit(main())
