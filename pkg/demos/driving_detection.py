"""Is the phone in a car? A small decision tree on accelerometer windows.

Driving and walking traces are cut into 2 s windows; per-axis mean and
variance feed the tree. Prints the held-out confusion matrix and writes the
ROC curve to ``roc.csv``.
"""
from _common import output_dir
from routewarp.detect import activity_corpus, format_confusion, train_and_evaluate, window_features, write_roc_csv

out = output_dir(__doc__.splitlines()[0])
rows = []
for trace, label in activity_corpus(seed=0):
    rows += window_features(trace, 2.0, label)
ev = train_and_evaluate(rows, seed=0)
print(f"{len(rows)} windows, 60/40 stratified split, tree depth {ev.tree.depth}")
print(format_confusion(ev.confusion))
print(f"accuracy {100 * ev.accuracy:.1f} %, AUC {ev.auc:.3f}")
write_roc_csv(out / "roc.csv", ev.fpr, ev.tpr, ev.thresholds)
