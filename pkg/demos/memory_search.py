"""Memory search under satisficing thresholds, three ways.

Scenario A: a strong cue surfaces the target quickly and confidence clears
the output threshold.  Scenario B: the cue points away from memory, the
feeling of knowing goes mismatch-dominant, and search stops almost at once.
Scenario C: a mediocre cue with an impatient searcher -- the acceptance
thresholds decay with every cycle and failed attempt until a middling
candidate becomes good enough.
"""

import numpy as np

from mgv import CueRetrievalEnvironment, KnowledgeStore, RetrievalConfig, run_retrieval


def search(label, env, config, seed):
    result, trace = run_retrieval({"cue"}, KnowledgeStore(), env, config,
                                  np.random.default_rng(seed))
    print(f"--- {label}")
    print(f"decision={result.decision!r} answer={result.answer!r} "
          f"cycles={result.cycles}")
    for record, (lam_fok, lam_conf) in zip(trace, result.threshold_history):
        conf = "-" if record.confidence is None else f"{record.confidence:.2f}"
        print(f"  cycle {record.cycle}: {record.strategy_id:<17} "
              f"fok=({record.fok.plus:.2f},{record.fok.minus:.2f}) "
              f"conf={conf:<5} thresholds->({lam_fok:.3f}, {lam_conf:.3f})")
    print()
    return result


# A strong cue: most glanced features match, the candidate surfaces fast.
search("strong cue",
       CueRetrievalEnvironment("capital of France", match_prob=0.9,
                               min_matches=5),
       RetrievalConfig(), seed=1)

# A hopeless cue: the first glance is all mismatch, the feeling of knowing
# goes negative, and search terminates before a single attempt is recorded.
search("hopeless cue",
       CueRetrievalEnvironment(None, match_prob=0.05),
       RetrievalConfig(default_lambda_fok=0.1), seed=0)

# A mediocre cue plus heavy satisficing: watch the confidence threshold sink
# (0.67 -> 0.33 -> 0.17 -> ...) until a so-so candidate slips through.
search("mediocre cue, impatient searcher",
       CueRetrievalEnvironment("something half-remembered", match_prob=0.62,
                               min_matches=14),
       RetrievalConfig(satisficing_rate=0.35, default_lambda_confidence=0.95),
       seed=2)
