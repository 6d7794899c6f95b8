import streamlit as st

from lib.dashboard import group_frame, require_artifact

st.set_page_config(page_title="Group Match", page_icon="📊", layout="wide")
st.title("📊 Average Match by Group")

table = require_artifact("group_match.json", "report")
df = group_frame(table)

st.dataframe(df, use_container_width=True)
st.bar_chart(df.T.fillna(0.0))

if table.get("undefined"):
    st.warning("Undefined cells (no pairs): " + ", ".join(table["undefined"]))

with st.expander("Pairs per cell"):
    st.dataframe(group_frame({**table, "cells": table.get("pairs", {})}), use_container_width=True)
