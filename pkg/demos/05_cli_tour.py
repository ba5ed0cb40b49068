"""
Command-line experiments
========================

The same experiments are available from the shell through
``python -m mgt_spectral`` (or the ``mgt-experiments`` script). Here we call
the entry point in-process and print what it writes.
"""

from mgt_spectral.experiments_cli import main

main(["regime", "--eta", "0.5", "--n-modes", "32"])
main(["spectrum", "--eta", "2", "--n-modes", "2", "--block", "reduced"])
main(["resolvent-scan", "--eta", "2", "--n-modes", "8", "--radii", "1,100"])
main(["smoothing", "--eta", "2", "--n-modes", "16", "--alpha", "0.5", "--times", "0.01,0.1,1"])
main(["dissipativity", "--mu", "8", "--u", "1"])

# an evolve run; exit code 0 even when the run blows up
code = main(["evolve", "--eta", "0.5", "--n-modes", "16", "--dt", "0.05", "--t-final", "10",
             "--nonlinearity", "zero", "--blowup-threshold", "1000", "--record-every", "20"])
print("exit code", code)
