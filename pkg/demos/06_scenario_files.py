"""
Scenario files and the command-line runner
==========================================

Every run can be described by a plain ``key = value`` file. The same
machinery backs the ``duallabor`` command; here it is driven from Python.
"""

from pathlib import Path

from duallabor import cli, scenario

fixtures = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
scn = scenario.load(fixtures / "parity.cfg", ["init.pi_B=0.3", "tau=4"])
print(scenario.dump({k: v for k, v in scn.values.items() if k.startswith(("init.", "regime", "tau"))}))

code, summary, artifacts = cli.execute("steady-state", scn, "scenario_out")
print(cli.summary_line("steady-state", code, summary))

# %%
# The equivalent shell commands:
#
#   duallabor run --mode steady-state --config tests/fixtures/parity.cfg --set init.pi_B=0.3 --out out
#   duallabor sweep --mode steady-state --config tests/fixtures/parity.cfg --sweep form.invest.beta=0.5,1,2
code, results = cli.sweep("steady-state", scn, cli.parse_grid(["form.invest.beta=0.5,1,2"]), "scenario_out")
for r in results:
    print(r["overrides"], round(r["summary"]["g_tilde"]["B"], 6))
