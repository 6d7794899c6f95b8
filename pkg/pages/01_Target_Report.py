import pandas as pd
import streamlit as st

from lib.dashboard import ranked_frame, require_artifact

st.set_page_config(page_title="Target Report", page_icon="🎯", layout="wide")
st.title("🎯 Target Report")

report = require_artifact("target_report.json", "target")

c1, c2, c3, c4 = st.columns(4)
c1.metric("Brand", report["brand_id"])
c2.metric("Users ranked", report["n_users"])
c3.metric("Target fraction", f"{report['target_fraction']:.2%}")
c4.metric("Selected", report["selected_count"])
if report.get("separation_auc") is not None:
    st.caption(f"separation AUC: {report['separation_auc']:.4f}")

df = ranked_frame(report)

with st.sidebar:
    st.header("Filters")
    q = st.text_input("Search by owner_id")
    only_selected = st.checkbox("Selected only", value=False)
    page_size = st.selectbox("Per page", [50, 100, 500], index=1)

if q:
    df = df[df["owner_id"].str.contains(q, case=False, regex=False)]
if only_selected:
    df = df[df["selected"]]

total = len(df)
page_count = max((total - 1) // page_size + 1, 1)
page = st.number_input("Page", min_value=1, max_value=page_count, value=1, step=1)
st.caption(f"{total} users • {page_size} per page")
offset = (page - 1) * page_size
st.dataframe(df.iloc[offset:offset + page_size], use_container_width=True, hide_index=True)

st.subheader("Per-category score distribution")
st.dataframe(pd.DataFrame(report.get("distributions", {})).T, use_container_width=True)
