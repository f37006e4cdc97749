import logging
import os

import matplotlib
import numpy as np
import pandas as pd
import plotly.graph_objects as go
from matplotlib.figure import Figure
from plotly.subplots import make_subplots

from models.cat_state import CatState, purity

logger = logging.getLogger(__name__)

# Fixed SVG element ids so repeated runs produce identical files.
matplotlib.rcParams['svg.hashsalt'] = 'decoherence'

CSV_COLUMNS = {
    'amplitude': ['t', 're_u', 'im_u', 'abs_u'],
    'rates': ['t', 'gamma', 'omega', 'delta_omega', 'valid'],
    'purity': ['t', 'purity'],
    'markovian': ['t', 're_u', 'im_u', 'abs_u', 'gamma', 'purity'],
    'oracle': ['t', 're_u', 'im_u', 'abs_u', 'abs_diff'],
}
STEADY_FRACTION = 0.1


def _format_float(value):
    # repr of a Python float is the shortest string that round-trips.
    value = float(value)
    return '' if np.isnan(value) else repr(value)


def _to_csv(frame, path):
    formatted = frame.copy()
    for column in formatted.columns:
        if formatted[column].dtype.kind == 'f':
            formatted[column] = formatted[column].map(_format_float)
    formatted.to_csv(path, index=False, lineterminator='\n')


class DecoherenceResultsAnalyzer:
    """Tabulate, summarize and plot one scenario's results."""
    def __init__(self, result):
        """
        Args:
            result (ScenarioResult): Output of DecoherenceSimulation.run.
        """
        if result is None or result.series is None:
            raise ValueError("Invalid result: expected a ScenarioResult with an amplitude series.")
        self.result = result
        self.frames = self._build_frames()
        logger.info("DecoherenceResultsAnalyzer initialized with outputs: %s", list(self.frames))

    # --- Tables ---

    def _build_frames(self):
        result = self.result
        outputs = result.config.outputs
        frames = {}
        times = result.series.times
        if 'amplitude' in outputs:
            frames['amplitude'] = self.amplitude_frame(result.series)
        if 'rates' in outputs:
            coeffs = result.coeffs
            frames['rates'] = pd.DataFrame({
                't': times,
                'gamma': coeffs.gamma,
                'omega': coeffs.omega,
                'delta_omega': coeffs.delta_omega,
                'valid': coeffs.valid.astype(int),
            })
        if 'purity' in outputs:
            frames['purity'] = pd.DataFrame({'t': times, 'purity': result.purity})
        if 'markovian' in outputs and result.markovian is not None:
            frame = self.amplitude_frame(result.markovian)
            frame['gamma'] = result.markovian_coeffs.gamma_M
            frame['purity'] = purity(CatState(result.config.beta0), np.minimum(result.markovian.abs_u, 1.0))
            frames['markovian'] = frame
        if result.oracle is not None:
            frame = self.amplitude_frame(result.oracle.series)
            frame['abs_diff'] = np.abs(result.oracle.series.u - result.series.u)
            frames['oracle'] = frame
        return frames

    @staticmethod
    def amplitude_frame(series):
        return pd.DataFrame({
            't': series.times,
            're_u': series.u.real,
            'im_u': series.u.imag,
            'abs_u': series.abs_u,
        })

    def get_frame(self, name):
        if name not in self.frames:
            logger.warning("No '%s' table for this scenario.", name)
            return None
        return self.frames[name]

    def write_csv(self, output_dir):
        """Write one CSV per table with fixed headers. Returns the written paths."""
        os.makedirs(output_dir, exist_ok=True)
        paths = []
        for name, frame in self.frames.items():
            path = os.path.join(output_dir, f"{name}.csv")
            _to_csv(frame[CSV_COLUMNS[name]], path)
            paths.append(path)
        logger.info("Wrote %d CSV files to %s", len(paths), output_dir)
        return paths

    # --- Metrics ---

    def summary_metrics(self):
        """min_purity over the run, and steady_gamma / steady_abs_u averaged over the last tenth."""
        result = self.result
        count = result.series.grid.count
        tail = slice(count - max(1, int(np.ceil(STEADY_FRACTION * count))), count)
        gamma_tail = result.coeffs.gamma[tail][result.coeffs.valid[tail]]
        return {
            'min_purity': float(np.min(result.purity)),
            'steady_gamma': float(np.mean(gamma_tail)) if gamma_tail.size else float('nan'),
            'steady_abs_u': float(np.mean(result.series.abs_u[tail])),
        }

    # --- Plotting Methods ---

    def _svg_panels(self):
        result = self.result
        times = result.series.times
        markovian = result.markovian
        panels = [('amplitude', '|u(t)|', result.series.abs_u,
                   markovian.abs_u if markovian is not None else None),
                  ('rates', 'Gamma(t)', result.coeffs.gamma,
                   np.full(times.shape, result.markovian_coeffs.gamma_M) if result.markovian_coeffs else None),
                  ('purity', 'Tr rho^2', result.purity,
                   purity(CatState(result.config.beta0), np.minimum(markovian.abs_u, 1.0))
                   if markovian is not None else None)]
        return [panel for panel in panels if panel[0] in self.frames]

    def plot_svg(self, output_dir):
        """One SVG per series; the Markovian counterpart is overlaid dashed."""
        os.makedirs(output_dir, exist_ok=True)
        times = self.result.series.times
        paths = []
        for name, label, values, reference in self._svg_panels():
            fig = Figure(figsize=(6, 4))
            ax = fig.add_subplot(1, 1, 1)
            ax.plot(times, values, color='tab:blue', label='exact')
            if reference is not None:
                ax.plot(times, reference, color='tab:red', linestyle='--', label='Markovian')
            if name == 'amplitude' and self.result.oracle is not None:
                ax.plot(times, self.result.oracle.series.abs_u, color='tab:green', linestyle=':', label='oracle')
            ax.set_xlabel('t [1/omega_0]')
            ax.set_ylabel(label)
            ax.legend(loc='best')
            fig.tight_layout()
            path = os.path.join(output_dir, f"{name}.svg")
            fig.savefig(path, format='svg', metadata={'Date': None})
            paths.append(path)
        return paths

    def plot_report_figure(self):
        result = self.result
        times = result.series.times
        fig = make_subplots(rows=3, cols=1, shared_xaxes=True,
                            subplot_titles=('Amplitude |u(t)|', 'Decay rate Gamma(t)', 'Cat-state purity'))
        fig.add_trace(go.Scatter(x=times, y=result.series.abs_u, mode='lines', name='|u|'), row=1, col=1)
        fig.add_trace(go.Scatter(x=times, y=result.coeffs.gamma, mode='lines', name='Gamma'), row=2, col=1)
        fig.add_trace(go.Scatter(x=times, y=result.purity, mode='lines', name='purity'), row=3, col=1)
        if result.markovian is not None:
            fig.add_trace(go.Scatter(x=times, y=result.markovian.abs_u, mode='lines', name='|u| Markovian',
                                     line=dict(dash='dash')), row=1, col=1)
            fig.add_trace(go.Scatter(x=times, y=np.full(times.shape, result.markovian_coeffs.gamma_M),
                                     mode='lines', name='Gamma Markovian', line=dict(dash='dash')), row=2, col=1)
        if result.oracle is not None:
            fig.add_trace(go.Scatter(x=times, y=result.oracle.series.abs_u, mode='lines', name='|u| oracle',
                                     line=dict(dash='dot')), row=1, col=1)
        fig.update_layout(height=900, xaxis3_title='t [1/omega_0]')
        return fig

    # --- HTML Report Generation ---

    def generate_html_report(self, output_dir):
        """
        Generates an HTML report with the scenario parameters, summary metrics
        and an interactive plot.

        Returns:
            str: Path of the written report.html.
        """
        result = self.result
        config = result.config
        os.makedirs(output_dir, exist_ok=True)
        report_path = os.path.join(output_dir, 'report.html')
        metrics = self.summary_metrics()
        bound = result.bound_state
        bound_text = (f"bound state at E = {bound.frequency:.6g}, |u| tends to {bound.residue:.6g}"
                      if bound is not None and bound.exists else "no bound state; |u| decays to 0")
        rows = [
            ('eta', config.spectral.eta), ('omega_c', config.spectral.omega_c),
            ('n', f"{config.spectral.n} ({config.spectral.classification})"),
            ('tau_E', config.tau_E), ('tau_0', config.tau_0),
            ('beta0', config.beta0), ('dt', config.grid.dt), ('t_max', config.grid.t_max),
            ('gamma_M', result.markovian_coeffs.gamma_M if result.markovian_coeffs else ''),
            ('delta_omega (Markovian)', result.markovian_coeffs.delta_omega if result.markovian_coeffs else ''),
            ('long-time behaviour', bound_text),
        ] + list(metrics.items())
        table = '\n'.join(f"<tr><td>{key}</td><td>{value}</td></tr>" for key, value in rows)
        figure_html = self.plot_report_figure().to_html(full_html=False, include_plotlyjs='cdn', div_id='dynamics')
        label = config.seed_label or 'scenario'
        html_content = f"""\
<!DOCTYPE html>
<html>
<head>
    <meta charset="utf-8">
    <title>Decoherence Report - {label}</title>
    <style>
        body {{ font-family: sans-serif; margin: 20px; }}
        h1, h2 {{ color: #333; }}
        td {{ padding: 2px 12px; }}
        .plot-container {{ margin-bottom: 40px; border: 1px solid #ddd; padding: 10px; }}
    </style>
</head>
<body>

<h1>Single-Mode Decoherence Results</h1>
<h2>Scenario: {label}</h2>
<table>
{table}
</table>

<div class="plot-container">
    {figure_html}
</div>

</body>
</html>
"""
        with open(report_path, 'w', encoding='utf-8') as f:
            f.write(html_content)
        logger.info("Report saved to %s", report_path)
        return report_path
