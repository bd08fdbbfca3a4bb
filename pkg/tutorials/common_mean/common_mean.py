import os

from confidencemeasure.cli.evidence import EvidenceFile
from confidencemeasure.combination.combination import combine, combine_tree
from confidencemeasure.core.core import central_interval, p_value

evidence = EvidenceFile.load(os.path.join(os.path.dirname(__file__), "evidence.json"))
curves = evidence.curves()

two_way = combine([curves["y1"], curves["y2"]])
four_way = combine(list(curves.values()))
tree = combine_tree([[curves["y1"], curves["y2"]], [curves["a1"], curves["a2"]]])

for name, result in [("data only", two_way), ("flat", four_way), ("tree", tree)]:
    interval = central_interval(result.curve, 0.025, 0.025)
    print(f"{name:>9}: {result.label}")
    print(f"           p-value against theta > -1: {p_value(result.curve, -1.0, 'greater'):.4f}")
    print(f"           95% central interval: {interval}")
