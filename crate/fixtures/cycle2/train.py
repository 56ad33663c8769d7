import pandas as pd
refined = pd.read_csv("s1.csv")
labels = pd.read_csv("labels.csv")[["y"]]
model = Model()
model.fit(refined, labels)
preds = model.predict(refined)
preds.to_csv("s2.csv")
