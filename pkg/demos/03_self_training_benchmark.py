#!/usr/bin/env python3
"""Full self-training runs on every built-in benchmark.

For each preset: pretrain on the source domain, score the unadapted model
on the target, then adapt with each assignment mode (greedy, transport,
full dual-consensus) and compare final teacher quality.
"""

import logo
from logo.metrics import confusion, iou_per_class, miou


def miou_of(model, features, truth, k):
    pred = logo.LabelVector(model.predict(features.data), k)
    cm = confusion(truth, pred)
    ious, defined = iou_per_class(cm)
    return miou(ious, defined)


pretrain_cfg = logo.TrainConfig(
    epochs=3, steps_per_epoch=300, batch_size=128, learning_rate=0.5, seed=1
)


def adapt_cfg(mode):
    return logo.TrainConfig(
        epochs=3, steps_per_epoch=250, batch_size=128, learning_rate=0.3,
        ema_momentum=0.995,
        ensemble=logo.EnsembleConfig(views=4, noise_sigma=0.1, seed=21),
        seed=33, assignment=mode,
    )


for name, cfg in logo.default_scenarios().items():
    scenario = logo.generate(cfg)
    model = logo.source_pretrain(scenario.source_features, scenario.source_labels, pretrain_cfg)
    source_only = miou_of(model, scenario.target_features, scenario.target_labels, cfg.k)
    print(f"\n=== {name} (k={cfg.k}, d={cfg.d}, translation={cfg.shift_translation})")
    print(f"  source-domain mIoU: {miou_of(model, scenario.source_features, scenario.source_labels, cfg.k):.4f}")
    print(f"  target source-only: {source_only:.4f}")
    for mode in ("greedy", "ot", "full"):
        report = logo.adapt(model, scenario.target_features, adapt_cfg(mode),
                            ground_truth=scenario.target_labels)
        final = miou_of(report.teacher, scenario.target_features, scenario.target_labels, cfg.k)
        rates = [round(e.consensus_rate, 3) for e in report.epochs]
        print(f"  {mode:<6} adapted mIoU {final:.4f} ({final - source_only:+.4f})"
              f"  consensus per epoch {rates}")
