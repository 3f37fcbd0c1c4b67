from qsatlink.cli import run

run()
