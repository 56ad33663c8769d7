import pandas as pd
feedback = pd.read_csv("s2.csv")
base = pd.read_csv("base.csv")
refined = base[["a", "b"]].merge(feedback)
refined.to_csv("s1.csv")
