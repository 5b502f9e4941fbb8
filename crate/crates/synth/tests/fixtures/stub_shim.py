"""Minimal shim used to exercise the host side of the line protocol."""
import json
import signal
import sys
import time
import traceback


def main():
    out = sys.stdout
    sys.stdout = sys.stderr
    job = json.loads(sys.stdin.readline())
    if job["typed"]:
        objects = {tuple(o) for o in job["objects"]}
    else:
        objects = set(job["objects"])
    init = {tuple(a) for a in job["init"]}
    goal = {tuple(a) for a in job["goal"]}

    def alarm(signum, frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGALRM, alarm)
    namespace = {"__name__": "program"}
    start = time.perf_counter()
    try:
        exec(compile(job["code"], "program.py", "exec"), namespace)
        if "get_plan" not in namespace:
            raise NameError("name 'get_plan' is not defined")
        signal.setitimer(signal.ITIMER_REAL, job["budget_s"])
        plan = namespace["get_plan"](objects, init, goal)
        signal.setitimer(signal.ITIMER_REAL, 0)
        response = {"status": "plan", "plan": plan}
    except KeyboardInterrupt:
        response = {"status": "timeout", "traceback": traceback.format_exc()}
    except Exception:
        signal.setitimer(signal.ITIMER_REAL, 0)
        response = {"status": "exception", "traceback": traceback.format_exc()}
    response["plan_time_s"] = time.perf_counter() - start
    try:
        line = json.dumps(response)
    except TypeError:
        line = json.dumps({"status": "exception", "traceback": "TypeError: plan is not serializable"})
    out.write(line + "\n")
    out.flush()


main()
