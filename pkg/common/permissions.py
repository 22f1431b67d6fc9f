"""
Custom permission classes for uqflow project.

This module contains reusable permission classes for the study endpoints.
"""

from rest_framework import permissions


class IsRunOwner(permissions.BasePermission):
    """
    Only the user who submitted a study run may read it.
    """

    def has_permission(self, request, view):
        return bool(request.user and request.user.is_authenticated)

    def has_object_permission(self, request, view, obj):
        return obj.owner_id == request.user.id
