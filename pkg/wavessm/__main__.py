import sys

from wavessm.app import main

sys.exit(main())
