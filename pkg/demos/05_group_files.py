"""Group files and the command line.

A group can be a built-in name or a small text file. This writes two
files, loads them back and runs a few CLI commands on them.
"""
import pathlib
import tempfile

from carnot_mcp import cli
from carnot_mcp.formats import dump_spec, load_spec

tmp = pathlib.Path(tempfile.mkdtemp())

# A corank-1 group given by its skew matrix, in a rotated basis.
(tmp / "rotated.txt").write_text("""\
format_version = 1
type = corank1
name = rotated
row =  0    3/5  4/5
row = -3/5  0    0
row = -4/5  0    0
""")
spec = load_spec(str(tmp / "rotated.txt"))
print("alphas:", spec.group.alphas, "kernel:", spec.group.kernel_dim)

# Built-ins serialize to the same format.
(tmp / "engel.txt").write_text(dump_spec(load_spec("engel")))
print((tmp / "engel.txt").read_text())

for argv in (["info", str(tmp / "engel.txt")],
             ["exp", str(tmp / "rotated.txt"), "--covector", "1,0,0,3"],
             ["mcp", "violate", "heisenberg:1", "--N", "4.9"],
             ["mcp", "check", "heisenberg:1", "--N", "5", "--samples", "20000", "--tgrid", "0.1,0.5,1"]):
    print("$ carnot-mcp", " ".join(argv))
    code = cli.main(argv)
    print(f"(exit {code})\n")
