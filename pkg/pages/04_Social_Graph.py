import pandas as pd
import streamlit as st

from lib.dashboard import require_artifact

st.set_page_config(page_title="Social Graph", page_icon="🕸️", layout="wide")
st.title("🕸️ Social Graph")

report = require_artifact("graph_report.json", "graph")
summary = report["summary"]

c1, c2, c3 = st.columns(3)
c1.metric("Nodes", summary["nodes"])
c2.metric("Edges", summary["edges"])
c3.metric("Isolated", summary["isolated"])
st.caption(f"degree min {summary['degree_min']} • mean {summary['degree_mean']:.2f} • max {summary['degree_max']}")

st.subheader("Edges by label")
labels = pd.DataFrame(list(summary["edges_by_label"].items()), columns=["label", "edges"])
st.dataframe(labels, use_container_width=True, hide_index=True)

if report.get("drops"):
    st.subheader("Dropped edges")
    st.dataframe(pd.DataFrame(report["drops"]), use_container_width=True, hide_index=True)
