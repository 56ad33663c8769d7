import pandas as pd
stage = pd.read_csv("stage1")
geo = pd.read_csv("geo.csv")
enriched = stage.merge(geo[["region"]])
enriched.to_csv("stage2")
