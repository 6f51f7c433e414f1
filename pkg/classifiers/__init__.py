# classifiers/__init__.py
"""Learned emitter-count classifiers: multi-layer NN, one-vs-one SVM, Gaussian Bayes."""

from classifiers.schemas import LabeledDataset, NnArchitecture, KernelSpec
from classifiers.nn import NnParameters, nn_train, nn_classify, save_nn, load_nn
from classifiers.svm import (
    SvmModel, MultiClassSvm, svm_train_binary, svm_train_multiclass,
    svm_classify_multiclass, save_svm, load_svm,
)
from classifiers.nbc import NbcModel, nbc_train, nbc_classify, save_nbc, load_nbc

__all__ = [
    "LabeledDataset",
    "NnArchitecture",
    "KernelSpec",
    "NnParameters",
    "nn_train",
    "nn_classify",
    "save_nn",
    "load_nn",
    "SvmModel",
    "MultiClassSvm",
    "svm_train_binary",
    "svm_train_multiclass",
    "svm_classify_multiclass",
    "save_svm",
    "load_svm",
    "NbcModel",
    "nbc_train",
    "nbc_classify",
    "save_nbc",
    "load_nbc",
]
