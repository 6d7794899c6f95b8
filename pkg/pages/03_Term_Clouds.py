import pandas as pd
import streamlit as st

from lib.dashboard import require_artifact

st.set_page_config(page_title="Term Clouds", page_icon="☁️", layout="wide")
st.title("☁️ Most Frequent Terms")

clouds = require_artifact("term_clouds.json", "report")
if not clouds:
    st.info("No term clouds in this run.")
    st.stop()

with st.sidebar:
    which = st.selectbox("Profile set", sorted(clouds))
    top = st.slider("Terms", min_value=5, max_value=100, value=30, step=5)

df = pd.DataFrame(clouds[which], columns=["term", "count"]).head(top)
st.caption(f"{len(clouds[which])} terms in '{which}'")
st.bar_chart(df.set_index("term"))
st.dataframe(df, use_container_width=True, hide_index=True)
