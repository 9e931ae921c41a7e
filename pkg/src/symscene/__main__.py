import sys

from symscene.cli import main

sys.exit(main())
