"""Regenerates golden_balls.csv (deterministic). Run from this directory."""
import random

rng = random.Random(20240601)
HEADER = "match_id,innings,over,ball_in_over,batter_id,bowler_id,runs_batter,extras,wicket,dismissal_type"
OUTCOMES = [0, 1, 2, 3, 4, 6, "W"]
WEIGHTS = [0.40, 0.30, 0.06, 0.01, 0.12, 0.05, 0.06]
DISMISSALS = ["bowled", "caught", "lbw", "run out", "stumped"]

lines = [HEADER]
for m in range(1, 3):
    mid = f"M{m}"
    target = None
    for inn in (1, 2):
        runs = wickets = 0
        batter = 1
        done = False
        for over in range(20):
            bowler = f"K{(over % 5) + 1}"
            for ball in range(1, 7):
                o = rng.choices(OUTCOMES, WEIGHTS)[0]
                extras = 1 if rng.random() < 0.04 else 0
                if o == "W":
                    wickets += 1
                    dismissal = rng.choice(DISMISSALS)
                    lines.append(f"{mid},{inn},{over},{ball},B{batter},{bowler},0,{extras},1,{dismissal}")
                    batter += 1
                else:
                    runs += o + extras
                    lines.append(f"{mid},{inn},{over},{ball},B{batter},{bowler},{o},{extras},0,")
                if wickets >= 10 or (target is not None and runs >= target):
                    done = True
                    break
            if done:
                break
        target = runs + 1

# Imperfections: a wicket with no recorded dismissal, overthrows, a duplicate
# delivery, and malformed rows that the parser must report and skip.
lines.append("M3,1,0,1,B1,K1,0,0,1,")
lines.append("M3,1,0,2,B2,K1,5,0,0,")
lines.append("M3,1,0,3,B2,K1,1,0,0,")
lines.append("M3,1,0,3,B2,K1,2,0,0,")
lines.append("M3,1,0,4,B2,K1,9,0,0,")
lines.append("M3,1,0,5,B2,K1,1,0,0")
lines.append("M3,3,0,6,B2,K1,1,0,0,")

with open("golden_balls.csv", "w") as f:
    f.write("\n".join(lines) + "\n")
print(len(lines) - 1, "rows")
