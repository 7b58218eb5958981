"""Simulator and certification toolkit for the planar slab-deletion games."""

from .diophantine import (CertReport, Params, RatPoint, badness_score,
                          calibrate_epsilon, certify_ball, delta_rect,
                          enumerate_dangerous, generation)
from .engine import (AbsoluteRules, MoveAliceAbs, MoveAlicePot,
                     PotentialRules, Transcript, Verdict, adjudicate,
                     new_match, outcome, submit_alice, submit_bob)
from .geometry import (Ball, Line, Point2, Rect, Slab, ball_in_ball,
                       ball_meets_rect, ball_meets_slab, dist_point_line,
                       legal_ball_avoiding_slab, min_width_slab, rect_in_slab)
from .scalars import (Cert3, Interval, NO, Scalar, UNKNOWN, YES, scalar,
                      scalar_from_token, scalar_to_token)
from .strategies import (AdapterAlice, BobGreedy, BobRandom, BobScripted,
                         BobTarget, EmptyAlice, PhiLedgerView, TriggerAlice,
                         choose_R, phi, phi_total, trigger_detect)

__version__ = "0.1.0"
