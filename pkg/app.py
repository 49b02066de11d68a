import logging

import numpy as np
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
import streamlit as st

from irl_core import CODE_KINDS, DEFAULT_GAMMA
from irl_core.bounds import bound_report, kl_trajectory_bound, sample_threshold_beta
from irl_core.ensemble import build_ensemble, verify_ensemble
from irl_core.exceptions import IrlLabError
from irl_core.data_io import read_csv
from irl_core.plots import success_figure
from irl_core.schemas import EnsembleConfig
from irl_core.trajectory import exact_trajectory_kl, extended_chain
from irl_core.utils import format_number, log_spaced_ints, setup_logging

setup_logging()
logger = logging.getLogger("irl_lab.app")

# Page configuration
st.set_page_config(
    page_title="IRL Lab - Hard Instances and Sample Complexity",
    page_icon="🧭",
    layout="wide",
    initial_sidebar_state="expanded"
)

REGIMES = ["default", "simplex", "certified"]


def init_session_state():
    """Initialize session state variables"""
    if 'results' not in st.session_state:
        st.session_state.results = None


@st.cache_data
def cached_ensemble(n: int, beta: float, eps, gamma: float, code_kind: str, regime: str):
    """Build and verify an ensemble once per parameter set"""
    cfg = EnsembleConfig.from_regime(n, beta, eps=eps, gamma=gamma, code_kind=code_kind, regime=regime)
    ensemble = build_ensemble(cfg)
    return cfg, ensemble, verify_ensemble(ensemble)


def sidebar_controls():
    """Create sidebar controls for the shared parameters"""
    st.sidebar.title("🧭 IRL Lab")

    st.sidebar.subheader("Ensemble Parameters")
    code_kind = st.sidebar.selectbox("Spherical code", CODE_KINDS, index=0)
    if code_kind == "icosahedron":
        n = 4
        st.sidebar.caption("The icosahedron code fixes n = 4")
    else:
        n = st.sidebar.number_input("States n", min_value=3, max_value=12, value=5, step=1)
    beta = st.sidebar.number_input("Margin beta", min_value=1e-4, max_value=0.2, value=0.01,
                                   step=0.001, format="%.4f")
    gamma = st.sidebar.slider("Discount gamma", 0.01, 0.99, DEFAULT_GAMMA, 0.01)
    regime = st.sidebar.selectbox("eps regime", REGIMES, index=0,
                                  help="How eps is chosen when no explicit value is set")

    with st.sidebar.expander("Advanced Options"):
        use_eps = st.checkbox("Set eps explicitly", value=False)
        eps = st.number_input("eps", min_value=1e-4, max_value=1.0, value=0.05,
                              step=0.005, format="%.4f") if use_eps else None
        m = st.number_input("Trajectory length m", min_value=1, max_value=10**7, value=100, step=10)

    return {
        'code_kind': code_kind,
        'n': int(n),
        'beta': float(beta),
        'gamma': float(gamma),
        'regime': regime,
        'eps': eps,
        'm': int(m),
    }


def ensemble_tab(params):
    """Ensemble construction and verification"""
    st.header("🔺 Hard Ensemble")

    try:
        cfg, ensemble, report = cached_ensemble(
            params['n'], params['beta'], params['eps'], params['gamma'],
            params['code_kind'], params['regime'],
        )
    except (IrlLabError, ValueError) as e:
        st.error(f"Cannot build the ensemble: {e}")
        return None

    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("Members", report.size)
    with col2:
        st.metric("eps", format_number(cfg.eps))
    with col3:
        st.metric("Min own margin", format_number(report.min_own_margin),
                  delta=format_number(report.min_own_margin - cfg.beta))
    with col4:
        st.metric("Max cross margin", format_number(report.max_cross_margin))

    if report.passed:
        st.success("Every member is beta-separable and excludes every other reward")
    else:
        st.warning(
            f"{len(report.margin_shortfalls)} margin shortfalls, "
            f"{len(report.cross_failures)} cross failures. "
            "The 'certified' regime picks the eps that reaches beta."
        )

    margins_df = pd.DataFrame([{
        'Facet': member.facet_index,
        'Vertices': ", ".join(str(v) for v in member.facet),
        'Margin': member.margin,
        'Meets beta': '✓' if member.meets_beta else '✗',
    } for member in ensemble])
    st.dataframe(margins_df, use_container_width=True)

    return cfg, ensemble


def bounds_tab(params):
    """Closed-form bounds at the chosen point"""
    st.header("📐 Bounds")

    try:
        report = bound_report(params['n'], params['beta'], eps=params['eps'], m=params['m'])
    except (IrlLabError, ValueError) as e:
        st.error(f"Bounds unavailable: {e}")
        return

    values = report.model_dump()
    vacuous = values.pop('vacuous')
    bounds_df = pd.DataFrame([
        {'Quantity': name, 'Value': format_number(value) if not isinstance(value, bool) else str(value)}
        for name, value in values.items()
    ])
    st.dataframe(bounds_df, use_container_width=True)

    flagged = [name for name, flag in vacuous.items() if flag]
    if flagged:
        st.info(f"Vacuous at this point: {', '.join(flagged)}")

    # Threshold as a function of beta
    betas = np.geomspace(params['beta'] / 10, params['beta'] * 2, 40)
    thresholds = []
    for b in betas:
        try:
            thresholds.append(sample_threshold_beta(params['n'], b))
        except IrlLabError:
            thresholds.append(np.nan)
    fig = px.line(x=betas, y=thresholds, log_x=True, log_y=True,
                  title="Sample threshold against beta")
    fig.update_layout(xaxis_title="beta", yaxis_title="m threshold")
    st.plotly_chart(fig, use_container_width=True)


def kl_tab(built):
    """Exact trajectory KL of an ensemble pair against the bound"""
    st.header("📉 Trajectory KL")

    if built is None:
        st.warning("Build a valid ensemble first")
        return
    cfg, ensemble = built

    col1, col2 = st.columns(2)
    with col1:
        i = st.selectbox("Generating member", list(range(len(ensemble))), index=0)
    with col2:
        j = st.selectbox("Alternative member", list(range(len(ensemble))), index=1)
    if i == j:
        st.info("Pick two different members")
        return

    P = extended_chain(ensemble[i].instance)
    Q = extended_chain(ensemble[j].instance)
    init = np.full(P.n, 1.0 / P.n)
    lengths = log_spaced_ints(2, 10**4, 12)

    exact = [exact_trajectory_kl(P, Q, init, m) for m in lengths]
    try:
        bound = [kl_trajectory_bound(cfg.n, cfg.eps, m) for m in lengths]
    except IrlLabError:
        bound = None

    fig = go.Figure()
    fig.add_trace(go.Scatter(x=lengths, y=exact, mode='lines+markers', name='Exact KL'))
    if bound is not None:
        fig.add_trace(go.Scatter(x=lengths, y=bound, mode='lines', name='Bound',
                                 line=dict(color='red', dash='dash')))
    fig.update_layout(title=f"KL between members {i} and {j}",
                      xaxis_title="m", yaxis_title="KL (nats)")
    fig.update_xaxes(type="log")
    fig.update_yaxes(type="log")
    st.plotly_chart(fig, use_container_width=True)


def results_tab(params):
    """Upload a results CSV and plot success curves"""
    st.header("📊 Experiment Results")

    uploaded = st.file_uploader("Results CSV", type=["csv"])
    if uploaded is not None:
        try:
            st.session_state.results = read_csv(uploaded)
        except (ValueError, KeyError) as e:
            st.error(f"Could not read results: {e}")

    rows = st.session_state.results
    if not rows:
        st.info("Upload a CSV written by `irl-lab experiment`")
        return

    first = rows[0]
    try:
        threshold = sample_threshold_beta(first.n, first.beta)
    except IrlLabError:
        threshold = None
    upper = st.number_input("Upper bound line (optional)", min_value=0.0, value=0.0)

    fig = success_figure(rows, threshold=threshold, upper_line=upper or None)
    st.plotly_chart(fig, use_container_width=True)
    st.caption(f"n={first.n}, k={first.k}, gamma={first.gamma}, measured beta={format_number(first.beta)}, "
               f"threshold m={format_number(threshold)}")


def main():
    """Main application"""
    init_session_state()
    params = sidebar_controls()

    tab1, tab2, tab3, tab4 = st.tabs([
        "🔺 Ensemble",
        "📐 Bounds",
        "📉 KL",
        "📊 Results",
    ])

    with tab1:
        built = ensemble_tab(params)

    with tab2:
        bounds_tab(params)

    with tab3:
        kl_tab(built)

    with tab4:
        results_tab(params)


if __name__ == "__main__":
    main()
