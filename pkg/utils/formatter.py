from typing import Dict, Iterable

from core.grid import HVParams


def format_params(params: HVParams) -> str:
    """
    One-line summary of the metric weights.
    """
    return f"κ={params.kappa:.6g}  λ={params.lambda_:.6g}  ε={params.epsilon:.6g}"


def format_result(summary: Dict) -> str:
    """
    Formats a solve summary for the console.
    """
    action = summary["action"]
    status = "✅ converged" if summary["converged"] else "⚠ not converged"
    text = (
        f"{status} ({summary['stop_reason']}, {summary['iterations']} iteration(s), "
        f"start {summary['k_label']})\n"
        f"distance: {summary['distance']:.10g}\n"
        f"action:   {action['total']:.10g}  "
        f"[κv²={action['kinetic_v']:.4g}, λv_x²={action['grad_v']:.4g}, "
        f"εv_xx²={action['curv_v']:.4g}, z²={action['vertical_z']:.4g}]"
    )
    if summary.get("k_actions"):
        text += "\nstarts:   " + ", ".join(f"{k}: {a:.6g}" for k, a in summary["k_actions"].items())
    if summary.get("failures"):
        text += "\nfailed:   " + "; ".join(f"{k}: {why}" for k, why in summary["failures"].items())
    return text


def format_degeneracy_table(rows: Iterable[Dict]) -> str:
    """
    Competitor-vs-linear action table for the epsilon = 0 demo.
    """
    header = f"{'H':>8} {'s':>6} {'λ':>8} {'linear':>12} {'bound':>12} {'exact':>12} {'discrete':>12}  verdict"
    lines = [header, "-" * len(header)]
    for row in rows:
        verdict = "competitor < linear" if row["discrete"] < row["linear"] else "linear wins"
        lines.append(
            f"{row['H']:>8.4g} {row['s']:>6.3g} {row['lambda']:>8.4g} {row['linear']:>12.6g} "
            f"{row['bound']:>12.6g} {row['exact']:>12.6g} {row['discrete']:>12.6g}  {verdict}"
        )
    return "\n".join(lines)


def format_halving(before: float, after: float) -> str:
    change = "decrease" if after < before else "no decrease"
    return f"halving: {before:.8g} -> {after:.8g} ({change})"
