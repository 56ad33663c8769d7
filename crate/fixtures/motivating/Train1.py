import pandas as pd
from sklearn.linear_model import LogisticRegression
data1 = pd.read_csv("file1.csv")
data2 = pd.read_csv("file2.csv")
X = data1[["loc", "age"]]
y = data2[["target"]]
X_train, X_test, y_train, y_test = \
    train_test_split(X, y, test_size=0.2)
lr = LogisticRegression()
a = lr.fit(X_train, y_train)
y_pred = lr.predict(X_test)
y_pred.to_csv("output.csv")
