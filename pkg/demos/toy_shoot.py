"""Plant gate sizes in a two-wiggle toy tract, forget them, and recover them by shooting."""

from tractforge.certify import chain_check, gate_condition_check
from tractforge.conformal import map_build
from tractforge.shooting import Evaluator, endpoint_sign_check, establish_brackets, forward_targets, shoot_solve
from tractforge.tract import toy_tract_build

planted = [0.2, 0.15]
tract = toy_tract_build([{"r": 8, "R": 16, "eps": planted[0]}, {"r": 20, "R": 28, "eps": planted[1]}],
                        0.5, 44.0)
targets = forward_targets(tract)
print("target moduli:", ", ".join(f"{t:.4g}" for t in targets))

ev = Evaluator(tract)
brackets = establish_brackets(tract, targets, evaluator=ev)
faces = endpoint_sign_check(tract, 2, brackets, targets, evaluator=ev)
print(faces.to_text(), end="")

gv, dv, log = shoot_solve(tract.with_eps([0.9, 0.9]), targets, brackets=brackets, evaluator=ev)
print("recovered eps:", [round(e, 5) for e in gv.eps], "planted:", planted)
print(f"residual {dv.residual:.2e} after {log.builds} map builds")

solved = tract.with_eps(gv.eps)
handle = map_build(solved)
for j in range(2):
    print(gate_condition_check(handle, solved, j, targets[j]).text())
print(chain_check(handle, solved, 0, targets[0]).text())
