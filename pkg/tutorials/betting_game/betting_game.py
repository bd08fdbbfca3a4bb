from confidencemeasure.game.game import EstimatorSpec, GameConfig, play
from confidencemeasure.models.models import NormalModelSpec

cfg = GameConfig(NormalModelSpec(theta=1.0, gamma=1.0, n=3), replicates=20_000, seed=0, workers=4)

for estimator in ["calibrated", "shift:1", "scale:2"]:
    report = play(EstimatorSpec.parse(estimator), cfg)
    print(f"{report.estimator:>10}: ks={report.calibration_ks:.4f}, max risk {report.max_risk.risk:.3f} on {report.max_risk.index}")

frame = play(EstimatorSpec.parse("shift:1"), cfg).to_frame()
print(frame[["index", "level", "coverage", "fair_odds", "expected_loss"]].to_string(index=False))
