"""
Streamlit dashboard for running experiment sweeps through the Precedence Scheduler API.

Run with:
    uv run uvicorn precedence_scheduler.api.main:app
    uv run streamlit run streamlit_app.py
"""

from __future__ import annotations

import json
from typing import Any, Dict, List

import requests
import streamlit as st

from precedence_scheduler.config import get_settings

DEFAULT_API_URL = get_settings().api_url

FAMILY_PARAMS: Dict[str, Dict[str, int]] = {
    "hidden_chain": {"n": 8, "hidden": 7},
    "outtree_static": {"n": 8, "hidden": 7},
    "intree": {"k": 3, "leaves": 4, "adversarial": 1},
    "average_lb": {"s": 3},
    "static_order_lb": {"omega": 2, "d": 2},
}


def _post(path: str, payload: dict) -> dict:
    response = requests.post(f"{DEFAULT_API_URL}{path}", json=payload, timeout=600)
    response.raise_for_status()
    return response.json()


@st.cache_data(ttl=60)
def _policies() -> List[str]:
    try:
        response = requests.get(f"{DEFAULT_API_URL}/", timeout=10)
        response.raise_for_status()
        return response.json()["policies"]
    except requests.RequestException:
        return ["equal_share"]


def _error_text(exc: requests.HTTPError) -> str:
    try:
        body = exc.response.json()
    except ValueError:
        return str(exc)
    if "message" in body:
        return f"{body['error']}: {body['message']}"
    return str(body.get("detail", exc))


st.set_page_config(page_title="Precedence Scheduler", page_icon="🗓️", layout="wide")

st.title("🗓️ Precedence Scheduler")
st.caption(
    "Seeded sweeps of non-clairvoyant scheduling policies against exact optima. "
    "Ratios and error measures are exact rationals."
)

with st.sidebar:
    st.header("Instances")
    source = st.radio("Source", ["random", "family"], horizontal=True)
    if source == "random":
        model = st.selectbox("Random model", ["chains", "out_forest", "in_forest", "general"])
        low, high = st.slider("Job count", 1, 12, (4, 8))
        unit = st.checkbox("Unit processing times", value=False)
        instances: Dict[str, Any] = {
            "kind": "random",
            "random": {"model": model, "min_n": low, "max_n": high, "unit_processing": unit},
        }
        count = st.number_input("Instances per seed", 1, 500, 10)
    else:
        family = st.selectbox("Family", sorted(FAMILY_PARAMS))
        params_text = st.text_area("Parameters (JSON)", json.dumps(FAMILY_PARAMS[family]))
        instances = {"kind": "family", "family": family, "params": json.loads(params_text)}
        count = 1

    st.header("Policy")
    policy = st.selectbox("Policy", _policies())
    policy_params = st.text_area("Policy parameters (JSON)", "{}")
    machines = st.number_input("Machines", 1, 8, 1)

    st.header("Noise")
    beta = st.text_input("beta (rational)", "0")
    swaps = st.number_input("Adjacent swaps", 0, 100, 0)
    length_delta = st.number_input("Chain length delta", 0, 10, 0)
    seeds_text = st.text_input("Seeds", "0, 1, 2")
    precision = st.number_input("Decimal precision", 0, 10, 3)

run_button = st.button("Run sweep", type="primary")

if "rows" not in st.session_state:
    st.session_state.rows = None
    st.session_state.error = None

if run_button:
    spec = {
        "name": "dashboard",
        "instances": instances,
        "count": int(count),
        "policy": {"name": policy, "params": json.loads(policy_params or "{}")},
        "prediction": {
            "noise": {"beta": beta, "swaps": int(swaps), "length_delta": int(length_delta)}
        },
        "machines": int(machines),
        "seeds": [int(seed) for seed in seeds_text.split(",") if seed.strip()],
    }
    with st.spinner("Running sweep..."):
        try:
            st.session_state.rows = _post("/run", {"spec": spec})["rows"]
            st.session_state.error = None
        except requests.HTTPError as exc:
            st.session_state.error = _error_text(exc)
            st.session_state.rows = None
        except Exception as exc:  # pragma: no cover
            st.session_state.error = str(exc)
            st.session_state.rows = None

if st.session_state.error:
    st.error(f"Sweep failed: {st.session_state.error}")

rows = st.session_state.rows
if rows:
    failures = sum(1 for row in rows if row["failure"])
    st.success(f"{len(rows)} rows, {failures} failed.")
    summary = _post("/report", {"rows": rows, "format": "summary", "precision": int(precision)})
    st.header("Summary")
    st.code(summary["document"], language=None)
    st.header("Rows")
    st.dataframe(
        [{key: value for key, value in row.items() if key != "wall_time"} for row in rows],
        use_container_width=True,
    )
    csv_report = _post("/report", {"rows": rows, "format": "csv", "precision": int(precision)})
    st.download_button("Download CSV", csv_report["document"], file_name="results.csv")
