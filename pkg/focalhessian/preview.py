#
# preview.py
# FocalHessian
#
# PNG previews of a finished run: recovered versus analytic spectrum and the practical
# step-size trace with its bounds. Written on request after the run, never live.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Gera imagens de previa do espectro recuperado e do passo pratico."""

import numpy as np
import matplotlib
matplotlib.use("Agg")
from matplotlib import pyplot as plt


def plot_spectrum(spectrum, reference, file_out):
    recovered = np.sort(np.abs(spectrum))[::-1]
    idx = np.arange(1, recovered.shape[0] + 1)

    plt.figure(figsize=(8, 5))
    plt.bar(idx, recovered, color="steelblue", label="recovered")
    if reference is not None:
        ref = np.sort(np.abs(reference))[::-1]
        plt.plot(idx, ref, color="black", linewidth=2, label="analytic")
    plt.yscale("log")
    plt.xlabel("eigenvalue index")
    plt.ylabel("Hessian eigenvalue")
    plt.legend()
    plt.tight_layout()
    plt.savefig(file_out, format="png", dpi=150)
    plt.close()


def plot_practical_steps(trace, file_out):
    df = trace.to_frame()

    fig, (ax_step, ax_cond) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    ax_step.plot(df["evaluations"], df["delta_p_unit"], color="steelblue", label="practical step")
    ax_step.plot(df["evaluations"], df["lower_bound"], color="gray", linestyle="--", label="bounds")
    ax_step.plot(df["evaluations"], df["upper_bound"], color="gray", linestyle="--")
    ax_step.plot(df["evaluations"], df["empirical_step"], color="orange", alpha=0.6, label="parent step")
    ax_step.set_yscale("log")
    ax_step.legend()

    ax_cond.plot(df["evaluations"], np.log10(np.sqrt(df["cond_c"])), color="darkred")
    ax_cond.set_xlabel("evaluations")
    ax_cond.set_ylabel("log10 sqrt(cond C)")
    fig.tight_layout()
    fig.savefig(file_out, format="png", dpi=150)
    plt.close(fig)
