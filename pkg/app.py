import streamlit as st

from lib.dashboard import artifacts_dir

st.set_page_config(page_title="Brandmatch Reports", page_icon="🎯", layout="wide")
st.title("Brandmatch Reports")
st.markdown(
    f"Reading run artifacts from **{artifacts_dir()}**. Produce them with `python -m lib.cli`, "
    "then open **Target Report**, **Group Match**, **Term Clouds** or **Social Graph**."
)
