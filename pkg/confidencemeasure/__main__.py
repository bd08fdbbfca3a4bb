from confidencemeasure.cli.cli import main

raise SystemExit(main())
